"""Node placement: random UE drops, MBS ring, HAPS at the area center."""

import math
from dataclasses import dataclass

import numpy as np

from .params import SystemParams


@dataclass(frozen=True, eq=False)
class Topology:
    """Positions of all nodes, in meters.

    UEs sit at ue_height above the ground plane, MBS antennas at
    mbs_height, the HAPS at the area center at its altitude. Arrays are
    (N, 3) and owned by the topology (treated as immutable).
    """

    ue_positions: np.ndarray      # (num_ues, 3)
    mbs_positions: np.ndarray     # (num_mbs, 3)
    haps_position: np.ndarray     # (3,)

    @property
    def num_ues(self) -> int:
        return self.ue_positions.shape[0]

    @property
    def num_mbs(self) -> int:
        return self.mbs_positions.shape[0]

    def station_position(self, j: int) -> np.ndarray:
        """Position of station j (0..num_mbs-1 = MBS, num_mbs = HAPS)."""
        if j == self.num_mbs:
            return self.haps_position
        return self.mbs_positions[j]

    def distances(self) -> np.ndarray:
        """(num_ues, num_mbs+1) Euclidean UE-to-station distances."""
        stations = np.vstack([self.mbs_positions, self.haps_position])
        diff = self.ue_positions[:, None, :] - stations[None, :, :]
        return np.linalg.norm(diff, axis=2)


def mbs_ring_positions(params: SystemParams, num_mbs: int | None = None) -> np.ndarray:
    """Equally spaced MBS sites on a ring around the area center."""
    n = params.num_mbs if num_mbs is None else num_mbs
    radius = params.mbs_ring_fraction * params.area_radius_m
    angles = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([
        radius * np.cos(angles),
        radius * np.sin(angles),
        np.full(n, params.mbs_height_m),
    ])


def generate_topology(params: SystemParams, rng: np.random.Generator) -> Topology:
    """Draw a topology: UEs uniform over the disk, MBS ring, HAPS at center.

    Uniformity in area requires radius = R*sqrt(u) with u uniform on [0, 1).
    """
    u = rng.random(params.num_ues)
    theta = rng.random(params.num_ues) * 2.0 * np.pi
    r = params.area_radius_m * np.sqrt(u)
    ue = np.column_stack([
        r * np.cos(theta),
        r * np.sin(theta),
        np.full(params.num_ues, params.ue_height_m),
    ])
    haps = np.array([0.0, 0.0, params.haps_altitude_m])
    return Topology(ue_positions=ue, mbs_positions=mbs_ring_positions(params), haps_position=haps)


def ue_angles(topology: Topology, i: int) -> tuple[float, float]:
    """Elevation/azimuth pair of UE i in the HAPS-centered frame, degrees.

    Elevation is measured from the ground horizontal at the UE up toward
    the HAPS (90 deg directly beneath the platform). Azimuth is the
    ground-plane angle of the UE relative to the HAPS nadir, measured
    from +x toward +y, in [0, 360); a UE at the nadir gets azimuth 0 by
    convention.
    """
    ue = topology.ue_positions[i]
    haps = topology.haps_position
    dx = ue[0] - haps[0]
    dy = ue[1] - haps[1]
    horizontal = math.hypot(dx, dy)
    vertical = haps[2] - ue[2]
    elevation = math.degrees(math.atan2(vertical, horizontal))
    if horizontal == 0.0:
        return 90.0, 0.0
    azimuth = math.degrees(math.atan2(dy, dx)) % 360.0
    return elevation, azimuth
