"""Numeric coefficients of the allocation problem for one realization.

All desired- and interference-power terms are linear in the per-UE
transmit powers once the subcarrier indicators are fixed, so the
channel state is collapsed here into coefficient arrays indexed by UE,
interferer and subcarrier. Downstream code never touches raw fading.
"""

from dataclasses import dataclass

import numpy as np

from .association import AssociationMatrix
from .channel import ChannelRealization
from .params import SystemParams
from .topology import Topology


@dataclass(frozen=True, eq=False)
class OptimizationInstance:
    """Immutable coefficient view of one (topology, channels, association).

    desired_terrestrial[i, f]: received-power coefficient of UE i from
    its serving MBS on subcarrier f (zero rows for HAPS-served UEs).
    desired_haps[i]: beam coefficient for HAPS-served UEs (frequency
    flat; zero otherwise).
    interference_terrestrial[i, k, f]: coefficient of interferer k's
    power onto UE i when k is MBS-served and both use subcarrier f.
    interference_haps[i, k]: same for HAPS-served interferers (flat in
    f; the subcarrier-match indicator is applied by the evaluator).
    """

    association: AssociationMatrix
    desired_terrestrial: np.ndarray    # (num_ues, num_subcarriers)
    desired_haps: np.ndarray           # (num_ues,)
    interference_terrestrial: np.ndarray  # (num_ues, num_ues, num_subcarriers)
    interference_haps: np.ndarray      # (num_ues, num_ues)
    params: SystemParams

    @property
    def num_ues(self) -> int:
        return self.desired_terrestrial.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.desired_terrestrial.shape[1]

    @property
    def has_haps(self) -> bool:
        return self.association.num_stations == self.params.num_mbs + 1

    def haps_served(self) -> np.ndarray:
        """Boolean mask of UEs served by the HAPS."""
        if not self.has_haps:
            return np.zeros(self.num_ues, dtype=bool)
        return self.association.serving_index == self.params.haps_index

    def power_cap(self, i: int) -> float:
        """Tightest per-UE power box implied by the serving budget.

        The MBS budget covers all antenna elements jointly, so a single
        UE can draw at most mbs_power / antennas even when served alone.
        """
        j = self.association.serving_index[i]
        if self.has_haps and j == self.params.haps_index:
            return self.params.haps_power_w
        return self.params.mbs_power_w / self.params.mbs_antennas

    def cross_cell_pairs(self) -> list[tuple[int, int]]:
        """Ordered (victim, interferer) pairs served by different stations."""
        serving = self.association.serving_index
        n = self.num_ues
        return [(i, k) for i in range(n) for k in range(n)
                if i != k and serving[i] != serving[k]]

    def same_cell_pairs(self) -> list[tuple[int, int]]:
        """Unordered co-served pairs (i < k)."""
        serving = self.association.serving_index
        n = self.num_ues
        return [(i, k) for i in range(n) for k in range(i + 1, n)
                if serving[i] == serving[k]]

    def interference_coefficient(self, i: int, k: int, f: int) -> float:
        """Power coefficient of interferer k onto UE i on subcarrier f."""
        if self.has_haps and self.association.serving_index[k] == self.params.haps_index:
            return float(self.interference_haps[i, k])
        return float(self.interference_terrestrial[i, k, f])


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def build_instance(topology: Topology, channels: ChannelRealization,
                   association: AssociationMatrix, params: SystemParams) -> OptimizationInstance:
    """Collapse channel state into the instance coefficient arrays."""
    n_ues = channels.num_ues
    n_mbs = channels.num_mbs
    n_f = params.num_subcarriers
    has_haps = association.num_stations == n_mbs + 1
    haps_col = n_mbs
    pl = channels.path_loss_matrix
    mags = np.abs(channels.fading)  # (r, i, j, f)

    serving = association.serving_index
    d_terr = np.zeros((n_ues, n_f))
    d_haps = np.zeros(n_ues)
    c_terr = np.zeros((n_ues, n_ues, n_f))
    c_haps = np.zeros((n_ues, n_ues))

    for i in range(n_ues):
        j = serving[i]
        if has_haps and j == haps_col:
            d_haps[i] = channels.beam_gain[i, i] / pl[i, haps_col]
        else:
            d_terr[i, :] = np.sum(mags[:, i, j, :] ** 2, axis=0) / pl[i, j]

    for k in range(n_ues):
        j = serving[k]
        if has_haps and j == haps_col:
            c_haps[:, k] = channels.beam_gain[:, k] / pl[:, haps_col]
            c_haps[k, k] = 0.0
        else:
            # magnitude of a product is the product of magnitudes
            cross = np.einsum("rif,rf->if", mags[:, :, j, :], mags[:, k, j, :])
            c_terr[:, k, :] = cross / pl[:, j][:, None]
            c_terr[k, k, :] = 0.0

    return OptimizationInstance(
        association=association,
        desired_terrestrial=_freeze(d_terr),
        desired_haps=_freeze(d_haps),
        interference_terrestrial=_freeze(c_terr),
        interference_haps=_freeze(c_haps),
        params=params,
    )
