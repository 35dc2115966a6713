"""Link-level channel state: free-space path loss and Rayleigh fading.

Terrestrial links combine free-space path loss with per-antenna,
per-subcarrier Rayleigh fading. The HAPS link is line-of-sight: only
path loss and the steered beam gain, no small-scale fading factor.
"""

from dataclasses import dataclass

import numpy as np

from .antenna import beam_gain_matrix
from .params import SPEED_OF_LIGHT, SystemParams
from .topology import Topology, ue_angles


def path_loss(carrier_frequency_hz: float, distance_m):
    """Free-space path loss (4 pi f d / c)^2 as a linear power ratio.

    Accepts scalar or array distances; zero distance is rejected rather
    than silently returning zero loss.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("degenerate distance")
    if carrier_frequency_hz <= 0.0:
        raise ValueError("carrier frequency must be positive")
    pl = (4.0 * np.pi * carrier_frequency_hz * d / SPEED_OF_LIGHT) ** 2
    return float(pl) if np.isscalar(distance_m) else pl


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One subframe of channel state for a topology.

    fading: complex (mbs_antennas, num_ues, num_mbs, num_subcarriers),
    unit-variance circularly-symmetric Gaussian entries; terrestrial
    links only.
    path_loss_matrix: (num_ues, num_mbs+1) linear power ratios; the last
    column is the HAPS slant path.
    beam_gain: (num_ues, num_ues); entry [i, k] is the gain of the spot
    beam steered at UE k, evaluated in UE i's direction.
    ue_angles_deg: (num_ues, 2) elevation/azimuth used for the beams.
    """

    fading: np.ndarray
    path_loss_matrix: np.ndarray
    beam_gain: np.ndarray
    ue_angles_deg: np.ndarray

    @property
    def num_ues(self) -> int:
        return self.path_loss_matrix.shape[0]

    @property
    def num_mbs(self) -> int:
        return self.path_loss_matrix.shape[1] - 1


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) draws: real and imaginary parts each with variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channels(topology: Topology, params: SystemParams, rng: np.random.Generator) -> ChannelRealization:
    """Draw one i.i.d. channel realization for the given topology."""
    shape = (params.mbs_antennas, topology.num_ues, topology.num_mbs, params.num_subcarriers)
    fading = complex_normal(rng, shape)
    dists = topology.distances()
    pl = path_loss(params.carrier_frequency_hz, dists)
    angles = np.array([ue_angles(topology, i) for i in range(topology.num_ues)])
    gain = beam_gain_matrix(params, angles)
    return ChannelRealization(fading=fading, path_loss_matrix=pl, beam_gain=gain, ue_angles_deg=angles)
