"""Capacity-constrained UE association by reference SINR.

Before any allocation exists, each UE is scored against every station
with a nominal equal-split link budget; UEs are then assigned greedily
in descending order of their best score, each taking its best station
that still has subcarriers left.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .params import SystemParams
from .topology import Topology


@dataclass(frozen=True, eq=False)
class AssociationMatrix:
    """Binary UE-to-station map; column num_mbs is the HAPS (if present)."""

    a: np.ndarray              # (num_ues, num_stations) 0/1
    serving_index: np.ndarray  # (num_ues,) station index per UE

    @property
    def num_ues(self) -> int:
        return self.a.shape[0]

    @property
    def num_stations(self) -> int:
        return self.a.shape[1]

    def served_by(self, station: int) -> np.ndarray:
        return np.flatnonzero(self.serving_index == station)

    def load(self, station: int) -> int:
        return int(np.sum(self.serving_index == station))


def reference_powers(channels: ChannelRealization, params: SystemParams,
                     include_haps: bool = True) -> np.ndarray:
    """Nominal received power of every UE from every candidate station.

    Equal-split budget: the HAPS offers haps_power/num_subcarriers through
    its boresight beam; an MBS offers mbs_power/(antennas*subcarriers)
    per element through the frequency-averaged sum of element gains.
    Shape (num_ues, num_stations); the HAPS column is last when present.
    """
    n_ues = channels.num_ues
    n_mbs = channels.num_mbs
    pl = channels.path_loss_matrix
    mbs_share = params.mbs_power_w / (params.mbs_antennas * params.num_subcarriers)
    # sum over antennas of |h|^2, averaged over subcarriers
    elem_gain = np.mean(np.sum(np.abs(channels.fading) ** 2, axis=0), axis=2)  # (ues, mbs)
    powers = mbs_share * elem_gain / pl[:, :n_mbs]
    if include_haps:
        haps_share = params.haps_power_w / params.num_subcarriers
        boresight = np.diag(channels.beam_gain)
        haps_col = haps_share * boresight / pl[:, n_mbs]
        powers = np.column_stack([powers, haps_col])
    return powers


def reference_sinr(channels: ChannelRealization, params: SystemParams,
                   include_haps: bool = True) -> np.ndarray:
    """Per-(UE, station) score: nominal power over noise plus the rest."""
    powers = reference_powers(channels, params, include_haps)
    total = np.sum(powers, axis=1, keepdims=True)
    return powers / (params.noise_power_w + (total - powers))


def associate(topology: Topology, channels: ChannelRealization, params: SystemParams,
              include_haps: bool = True) -> AssociationMatrix:
    """Greedy association honoring per-station subcarrier capacity.

    UEs are processed in descending order of their best reference SINR
    (ties: lower UE index); each takes the best-scoring station with
    room (ties: lower station index). Capacity per station is
    num_subcarriers // subcarriers_per_ue.
    """
    sinr = reference_sinr(channels, params, include_haps)
    n_ues, n_stations = sinr.shape
    capacity = params.station_capacity
    if n_ues > n_stations * capacity:
        raise ValueError("infeasible association: total station capacity "
                         f"{n_stations * capacity} < {n_ues} UEs")
    best = np.max(sinr, axis=1)
    order = np.lexsort((np.arange(n_ues), -best))
    serving = np.full(n_ues, -1, dtype=int)
    load = np.zeros(n_stations, dtype=int)
    for i in order:
        open_stations = np.flatnonzero(load < capacity)
        j = open_stations[np.argmax(sinr[i, open_stations])]
        serving[i] = j
        load[j] += 1
    a = np.zeros((n_ues, n_stations), dtype=int)
    a[np.arange(n_ues), serving] = 1
    return AssociationMatrix(a=a, serving_index=serving)
