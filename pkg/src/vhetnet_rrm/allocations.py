"""Closed-form allocation rules shared by the driver and the scenarios."""

import numpy as np

from .association import AssociationMatrix
from .params import SystemParams


def equal_power_vector(association: AssociationMatrix, params: SystemParams) -> np.ndarray:
    """Split each station's budget evenly over its UEs.

    MBS budgets cover all antenna elements, so a UE's share is
    mbs_power / (antennas * load); the HAPS splits haps_power / load.
    Both budget rows then hold with equality.
    """
    p = np.zeros(association.num_ues)
    has_haps = association.num_stations == params.num_mbs + 1
    for j in range(association.num_stations):
        members = association.served_by(j)
        if members.size == 0:
            continue
        if has_haps and j == params.haps_index:
            p[members] = params.haps_power_w / members.size
        else:
            p[members] = params.mbs_power_w / (params.mbs_antennas * members.size)
    return p


def random_feasible_F(association: AssociationMatrix, params: SystemParams,
                      rng: np.random.Generator) -> np.ndarray:
    """Uniform random orthogonal subcarrier assignment within each station.

    A random permutation of the subcarriers is chunked over the
    station's UEs (index order), so every UE gets subcarriers_per_ue
    distinct subcarriers and no two co-served UEs collide.
    """
    nf = params.num_subcarriers
    n_sc = params.subcarriers_per_ue
    F = np.zeros((association.num_ues, nf), dtype=int)
    for j in range(association.num_stations):
        members = association.served_by(j)
        if members.size * n_sc > nf:
            raise ValueError("station load exceeds subcarrier capacity")
        perm = rng.permutation(nf)
        for pos, i in enumerate(members):
            for f in perm[pos * n_sc:(pos + 1) * n_sc]:
                F[i, f] = 1
    return F


def greedy_orthogonal_F(association: AssociationMatrix, params: SystemParams) -> np.ndarray:
    """Deterministic orthogonal assignment: each station's UEs take the
    lowest free subcarriers in UE-index order (the all-ties case of the
    round-and-repair greedy)."""
    nf = params.num_subcarriers
    n_sc = params.subcarriers_per_ue
    F = np.zeros((association.num_ues, nf), dtype=int)
    for j in range(association.num_stations):
        nxt = 0
        for i in association.served_by(j):
            for _ in range(n_sc):
                if nxt >= nf:
                    raise ValueError("station load exceeds subcarrier capacity")
                F[i, nxt] = 1
                nxt += 1
    return F


def check_allocation(instance, F: np.ndarray, P: np.ndarray, tol: float = 1e-6) -> dict:
    """Direct violation report of the physical constraints at (F, P).

    Covers the power budgets, the same-station orthogonality, the
    per-UE cardinality, binariness of F and nonnegativity of P.
    """
    params = instance.params
    assoc = instance.association
    F = np.asarray(F)
    P = np.asarray(P, dtype=float)
    out = {}
    out["binary"] = float(np.max(np.abs(F - np.round(F)), initial=0.0))
    out["cardinality"] = float(np.max(np.abs(F.sum(axis=1) - params.subcarriers_per_ue)))
    worst = 0.0
    for j in range(assoc.num_stations):
        members = assoc.served_by(j)
        if members.size == 0:
            continue
        col = np.round(F[members]).sum(axis=0)
        worst = max(worst, float(np.max(col - 1.0, initial=0.0)))
    out["orthogonality"] = worst
    worst = 0.0
    has_haps = assoc.num_stations == params.num_mbs + 1
    for j in range(assoc.num_stations):
        members = assoc.served_by(j)
        if members.size == 0:
            continue
        if has_haps and j == params.haps_index:
            used, cap = float(np.sum(P[members])), params.haps_power_w
        else:
            used, cap = params.mbs_antennas * float(np.sum(P[members])), params.mbs_power_w
        worst = max(worst, (used - cap) / cap)
    out["budget"] = worst
    out["nonnegative"] = float(np.max(-P, initial=0.0))
    out["ok"] = all(v <= tol for k, v in out.items() if k != "ok")
    return out
