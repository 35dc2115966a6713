"""HAPS antenna model: parabolic element pattern plus planar-array factor.

The platform carries a nadir-pointing uniform planar array with
half-wavelength element spacing. A spot beam toward a served UE is a
phase-steered configuration of the full array; its gain toward any
ground direction is the element pattern (dB) plus the array factor (dB).

Directions are given as (elevation, azimuth) pairs in degrees in the
platform-centered frame of ``topology.ue_angles``: elevation from the
ground horizontal (90 deg at nadir), azimuth in [0, 360).
"""

import math

import numpy as np

from .params import SystemParams


def _direction_cosines(elevation_deg, azimuth_deg):
    """(u, v) = (sin θz cos φ, sin θz sin φ) with θz the zenith angle."""
    theta_z = np.radians(90.0 - np.asarray(elevation_deg, dtype=float))
    phi = np.radians(np.asarray(azimuth_deg, dtype=float))
    st = np.sin(theta_z)
    return st * np.cos(phi), st * np.sin(phi)


def element_pattern_db(params: SystemParams, elevation_deg, azimuth_deg):
    """Single-element gain in dBi toward the given direction.

    Quadratic roll-off in the two tilt angles off nadir, floored at
    front_to_back_db below the peak. Steering does not move the element
    pattern; only the array factor is steered.
    """
    theta_z = np.radians(90.0 - np.asarray(elevation_deg, dtype=float))
    phi = np.radians(np.asarray(azimuth_deg, dtype=float))
    st, ct = np.sin(theta_z), np.cos(theta_z)
    tilt_h = np.degrees(np.arctan2(st * np.cos(phi), ct))
    tilt_v = np.degrees(np.arctan2(st * np.sin(phi), ct))
    bw = params.beamwidth_3db_deg
    rolloff = 12.0 * (tilt_h / bw) ** 2 + 12.0 * (tilt_v / bw) ** 2
    return params.element_gain_dbi - np.minimum(rolloff, params.front_to_back_db)


def _dirichlet_power(n: int, delta):
    """|sum_{m=0}^{n-1} exp(j pi m delta)|^2, stable near coherence."""
    delta = np.asarray(delta, dtype=float)
    half = 0.5 * np.pi * delta
    s = np.sin(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(n * half) / s
    ratio = np.where(np.abs(s) < 1e-9, float(n), ratio)
    return ratio**2


def array_factor(params: SystemParams, steer: tuple[float, float], eval_dir) -> np.ndarray:
    """Array power gain toward eval_dir when phase-steered to steer.

    Normalized so the coherent peak equals upa_v * upa_h (the array
    aperture gain over one element).
    """
    eval_el, eval_az = eval_dir
    u_s, v_s = _direction_cosines(steer[0], steer[1])
    u_e, v_e = _direction_cosines(eval_el, eval_az)
    num = _dirichlet_power(params.upa_v, u_e - u_s) * _dirichlet_power(params.upa_h, v_e - v_s)
    return num / (params.upa_v * params.upa_h)


def upa_beam_gain(params: SystemParams, steer: tuple[float, float], eval_dir: tuple[float, float]) -> float:
    """Linear power gain of the beam steered to `steer`, seen at `eval_dir`."""
    elem = 10.0 ** (element_pattern_db(params, eval_dir[0], eval_dir[1]) / 10.0)
    return float(elem * array_factor(params, steer, eval_dir))


def beam_gain_matrix(params: SystemParams, angles: np.ndarray) -> np.ndarray:
    """G[i, k]: gain of the beam steered at UE k, evaluated at UE i.

    `angles` is (num_ues, 2) of (elevation, azimuth) degrees. The
    diagonal holds each UE's own boresight gain.
    """
    el = angles[:, 0]
    az = angles[:, 1]
    u, v = _direction_cosines(el, az)
    du = u[:, None] - u[None, :]
    dv = v[:, None] - v[None, :]
    af = _dirichlet_power(params.upa_v, du) * _dirichlet_power(params.upa_h, dv)
    af /= params.upa_v * params.upa_h
    elem = 10.0 ** (element_pattern_db(params, el, az) / 10.0)
    return elem[:, None] * af


def boresight_gain_dbi(params: SystemParams) -> float:
    """Peak gain: element peak plus 10 log10 of the element count."""
    return params.element_gain_dbi + 10.0 * math.log10(params.upa_v * params.upa_h)
