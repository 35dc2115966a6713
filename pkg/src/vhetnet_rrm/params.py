"""System-level simulation parameters and unit helpers."""

from dataclasses import dataclass, replace

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    import math
    if watts <= 0.0:
        return float("-inf")
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    import math
    if linear <= 0.0:
        return float("-inf")
    return 10.0 * math.log10(linear)


@dataclass(frozen=True)
class SystemParams:
    """Immutable bundle of network, radio and algorithm parameters.

    Powers are in watts, distances in meters, frequencies in Hz. The
    noise power is per subcarrier.
    """

    carrier_frequency_hz: float = 2.545e9
    num_subcarriers: int = 4
    num_mbs: int = 4
    num_ues: int = 16
    mbs_antennas: int = 8
    subcarriers_per_ue: int = 1
    haps_power_w: float = dbm_to_watts(55.0)
    mbs_power_w: float = dbm_to_watts(43.0)
    noise_power_w: float = dbm_to_watts(-105.0)
    haps_altitude_m: float = 20_000.0
    area_radius_m: float = 2_000.0
    upa_v: int = 64
    upa_h: int = 64
    element_gain_dbi: float = 8.0
    beamwidth_3db_deg: float = 65.0
    front_to_back_db: float = 30.0
    max_sca_iterations: int = 20
    # deployment conventions (configurable; not fixed by the physics above)
    mbs_height_m: float = 25.0
    ue_height_m: float = 1.5
    mbs_ring_fraction: float = 0.6
    # SCA stopping rule: relative objective change below this ends the loop
    sca_rel_tol: float = 1e-3

    def __post_init__(self):
        positive = {
            "carrier_frequency_hz": self.carrier_frequency_hz,
            "num_subcarriers": self.num_subcarriers,
            "num_mbs": self.num_mbs,
            "num_ues": self.num_ues,
            "mbs_antennas": self.mbs_antennas,
            "subcarriers_per_ue": self.subcarriers_per_ue,
            "haps_power_w": self.haps_power_w,
            "mbs_power_w": self.mbs_power_w,
            "noise_power_w": self.noise_power_w,
            "haps_altitude_m": self.haps_altitude_m,
            "area_radius_m": self.area_radius_m,
            "upa_v": self.upa_v,
            "upa_h": self.upa_h,
            "max_sca_iterations": self.max_sca_iterations,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if self.subcarriers_per_ue > self.num_subcarriers:
            raise ValueError("subcarriers_per_ue cannot exceed num_subcarriers")

    @property
    def num_stations(self) -> int:
        """MBS count plus the HAPS."""
        return self.num_mbs + 1

    @property
    def haps_index(self) -> int:
        """0-based column index of the HAPS in station-indexed arrays."""
        return self.num_mbs

    @property
    def station_capacity(self) -> int:
        """Maximum UEs one station can serve with orthogonal subcarriers."""
        return self.num_subcarriers // self.subcarriers_per_ue

    def station_power_w(self, station: int) -> float:
        """Transmit power budget of station (0..num_mbs; num_mbs = HAPS)."""
        return self.haps_power_w if station == self.haps_index else self.mbs_power_w

    def with_overrides(self, **kwargs) -> "SystemParams":
        return replace(self, **kwargs)


def desk_params(**overrides) -> SystemParams:
    """Reduced-scale defaults that keep the exact solver tractable in CI."""
    base = dict(num_ues=8, num_subcarriers=3, num_mbs=4, mbs_antennas=4)
    base.update(overrides)
    return SystemParams(**base)


def paper_params(**overrides) -> SystemParams:
    """Full-scale defaults (16 UEs, 4 subcarriers, 8 MBS antennas)."""
    return SystemParams(**overrides)
