"""Primal-dual interior-point solver for LP + second-order-cone programs.

Solves the continuous relaxation of a ConicProgram (integrality
ignored, optionally with extra variable fixings) via a homogeneous
self-dual embedding with Nesterov-Todd scaling and Mehrotra
predictor-corrector steps. Infeasible and unbounded programs are
detected through the embedding's certificates, which branch-and-bound
relies on for sound pruning.

Internally the program is reduced to the standard form

    minimize c'x  s.t.  A x = b,  G x + s = h,  s in K,

with K a product of a nonnegative orthant and 4-dimensional second
order cones (one per quadratic row x^2 + y^2 <= u, lifted via the
identity u = ((u+1)/2)^2 - ((u-1)/2)^2). Dense factorizations are used:
problem sizes here are a few hundred variables.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .transform import ConicProgram


@dataclass
class SolverOptions:
    feas_tol: float = 1e-8          # accepted max relative violation
    gap_tol: float = 1e-6           # branch-and-bound relative gap
    barrier_tol: float = 1e-9       # interior-point convergence target
    max_barrier_iters: int = 200
    max_nodes: int = 10**6
    step_fraction: float = 0.99
    node_log = None                 # optional file-like for search traces

    def __post_init__(self):
        for name in ("feas_tol", "gap_tol", "barrier_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ViolationReport:
    linear_eq: float = 0.0
    linear_ineq: float = 0.0
    cone: float = 0.0
    bounds: float = 0.0
    integrality: float = 0.0

    def max_violation(self, include_integrality: bool = True) -> float:
        vals = [self.linear_eq, self.linear_ineq, self.cone, self.bounds]
        if include_integrality:
            vals.append(self.integrality)
        return max(vals)

    def ok(self, tol: float, include_integrality: bool = True) -> bool:
        return self.max_violation(include_integrality) <= tol


@dataclass
class RelaxationSolution:
    primal: np.ndarray | None
    objective: float
    status: str                    # optimal | infeasible | unbounded | iteration-limit
    max_violation: float
    dual_bound: float = np.inf     # certified upper bound on the maximum
    iterations: int = 0


def verify_feasibility(program: ConicProgram, x: np.ndarray, tol: float = 1e-6) -> ViolationReport:
    """Relative violation per constraint class at a decoded point.

    Rows are normalized by max(1, |rhs|), cones by max(1, |u|), bounds
    by max(1, |bound|); integrality is the distance to the nearest
    integer on masked slots.
    """
    rep = ViolationReport()
    if program.a_eq.shape[0]:
        r = program.a_eq @ x - program.b_eq
        rep.linear_eq = float(np.max(np.abs(r) / np.maximum(1.0, np.abs(program.b_eq))))
    if program.a_ub.shape[0]:
        r = program.a_ub @ x - program.b_ub
        rep.linear_ineq = float(np.max(np.maximum(r, 0.0) / np.maximum(1.0, np.abs(program.b_ub))))
    if program.num_cones:
        u = program.cone_u @ x + program.cone_u_const
        quad = x[program.cone_x] ** 2 + x[program.cone_y] ** 2
        rep.cone = float(np.max(np.maximum(quad - u, 0.0) / np.maximum(1.0, np.abs(u))))
    lo = np.maximum(program.lb - x, 0.0) / np.maximum(1.0, np.abs(np.where(np.isfinite(program.lb), program.lb, 0.0)))
    hi = np.maximum(x - program.ub, 0.0) / np.maximum(1.0, np.abs(np.where(np.isfinite(program.ub), program.ub, 0.0)))
    rep.bounds = float(max(np.max(lo, initial=0.0), np.max(hi, initial=0.0)))
    if np.any(program.is_integer):
        xi = x[program.is_integer]
        rep.integrality = float(np.max(np.abs(xi - np.round(xi)), initial=0.0))
    return rep


# ---------------------------------------------------------------------------
# reduction to standard conic form


class _Infeasible(Exception):
    pass


@dataclass
class _StandardForm:
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    G: sp.csr_matrix
    h: np.ndarray
    dims_l: int
    n_cones: int                  # all cones have dimension 4
    active: np.ndarray            # program slots of the reduced variables
    fixed_values: np.ndarray      # per-slot values; NaN for active
    col_scale: np.ndarray
    obj_scale: float
    obj_offset: float             # fixed-variable objective contribution


def _pattern_cache(program: ConicProgram):
    cache = getattr(program, "_reduce_cache", None)
    if cache is None:
        def pattern(mat):
            pat = mat.copy()
            pat.data = np.ones_like(pat.data)
            return pat, np.diff(mat.indptr)
        cache = {
            "eq": pattern(program.a_eq),
            "ub": pattern(program.a_ub),
        }
        object.__setattr__(program, "_reduce_cache", cache)
    return cache


def _singleton_info(mat, pattern, nnz_row, is_fixed, subst, rhs_full):
    """live counts, shifted rhs, and (column, coefficient) sums of the
    live entries per row; for singleton rows the sums ARE the entry."""
    act = (~is_fixed).astype(float)
    live = nnz_row - pattern @ is_fixed.astype(float)
    rhs = rhs_full - mat @ subst
    col_ids = np.arange(mat.shape[1], dtype=float)
    col_sum = pattern @ (col_ids * act)
    coef_sum = mat @ act
    return live, rhs, col_sum, coef_sum


def _reduce(program: ConicProgram, fixings: dict | None) -> _StandardForm:
    n = program.num_vars
    lb = program.lb.copy()
    ub = program.ub.copy()
    fixed_values = np.full(n, np.nan)
    if fixings:
        for slot, val in fixings.items():
            if val < lb[slot] - 1e-9 or val > ub[slot] + 1e-9:
                raise _Infeasible
            fixed_values[slot] = val
    cache = _pattern_cache(program)
    eq_pat, eq_nnz = cache["eq"]
    ub_pat, ub_nnz = cache["ub"]

    # fixpoint: pinned boxes and singleton equalities collapse into the
    # fixing array
    for _ in range(8):
        changed = False
        pinned = np.isfinite(lb) & np.isfinite(ub) & (ub - lb <= 0.0) & np.isnan(fixed_values)
        if np.any(pinned):
            fixed_values[pinned] = lb[pinned]
            changed = True
        is_fixed = ~np.isnan(fixed_values)
        subst = np.where(is_fixed, fixed_values, 0.0)
        if program.a_eq.shape[0]:
            live, rhs, col_sum, coef_sum = _singleton_info(
                program.a_eq, eq_pat, eq_nnz, is_fixed, subst, program.b_eq)
            singles = np.flatnonzero(np.abs(live - 1.0) < 0.5)
            for r in singles:
                slot = int(round(col_sum[r]))
                coef = coef_sum[r]
                value = rhs[r] / coef
                if value < lb[slot] - 1e-7 * max(1.0, abs(value)) or \
                        value > ub[slot] + 1e-7 * max(1.0, abs(value)):
                    raise _Infeasible
                if np.isnan(fixed_values[slot]):
                    fixed_values[slot] = value
                    changed = True
                elif abs(fixed_values[slot] - value) > 1e-7 * max(1.0, abs(value)):
                    raise _Infeasible
        if not changed:
            break

    is_fixed = ~np.isnan(fixed_values)
    subst = np.where(is_fixed, fixed_values, 0.0)

    # singleton inequality rows tighten bounds instead of becoming rows
    keep_ub = np.zeros(0, dtype=int)
    if program.a_ub.shape[0]:
        live, rhs, col_sum, coef_sum = _singleton_info(
            program.a_ub, ub_pat, ub_nnz, is_fixed, subst, program.b_ub)
        const_rows = np.flatnonzero(np.abs(live) < 0.5)
        if np.any(rhs[const_rows] < -1e-7 * np.maximum(1.0, np.abs(program.b_ub[const_rows]))):
            raise _Infeasible
        singles = np.flatnonzero(np.abs(live - 1.0) < 0.5)
        if singles.size:
            cols = np.round(col_sum[singles]).astype(int)
            coefs = coef_sum[singles]
            bounds = rhs[singles] / coefs
            up = coefs > 0
            np.minimum.at(ub, cols[up], bounds[up])
            np.maximum.at(lb, cols[~up], bounds[~up])
        keep_ub = np.flatnonzero(live > 1.5)
    bad = (lb > ub + 1e-9 * np.maximum(1.0, np.abs(ub))) & ~is_fixed
    if np.any(bad):
        raise _Infeasible

    # re-pin boxes closed by the singleton rows
    pinned = np.isfinite(lb) & np.isfinite(ub) & (ub - lb <= 0.0) & ~is_fixed
    if np.any(pinned):
        fixed_values[pinned] = lb[pinned]
        is_fixed = ~np.isnan(fixed_values)
        subst = np.where(is_fixed, fixed_values, 0.0)

    active = np.flatnonzero(~is_fixed)
    pos = {int(slot): idx for idx, slot in enumerate(active)}
    na = active.size

    def split(mat: sp.csr_matrix, rhs: np.ndarray):
        shift = mat @ subst
        reduced = mat[:, active] if mat.shape[0] else sp.csr_matrix((0, na))
        return reduced, rhs - shift

    a_eq, b_eq = split(program.a_eq, program.b_eq)
    keep = np.ravel(abs(a_eq).sum(axis=1)) > 0 if a_eq.shape[0] else np.zeros(0, dtype=bool)
    for r in np.flatnonzero(~keep):
        if abs(b_eq[r]) > 1e-7 * max(1.0, abs(program.b_eq[r])):
            raise _Infeasible
    a_eq, b_eq = a_eq[keep], b_eq[keep]

    rows_G, rhs_G = [], []
    if keep_ub.size:
        a_ub, b_ub = split(program.a_ub[keep_ub], program.b_ub[keep_ub])
        # opposing inequality pairs have no interior and stall the
        # barrier; fold them into equality rows (and drop duplicates)
        buckets = {}
        for r in range(a_ub.shape[0]):
            sl = slice(a_ub.indptr[r], a_ub.indptr[r + 1])
            cols = a_ub.indices[sl]
            vals = a_ub.data[sl]
            lead = vals[0]
            key = (tuple(cols.tolist()),
                   tuple(np.round(vals / lead, 10).tolist()),
                   round(b_ub[r] / lead, 10))
            buckets.setdefault(key, []).append((r, lead > 0))
        keep_rows, extra_eq = [], []
        for key, members in buckets.items():
            signs = {s for _, s in members}
            if len(signs) == 2:
                extra_eq.append(members[0][0])
            else:
                keep_rows.append(members[0][0])
        keep_rows.sort()
        extra_eq.sort()
        if extra_eq:
            a_eq = sp.vstack([a_eq, a_ub[extra_eq]]).tocsr()
            b_eq = np.concatenate([b_eq, b_ub[extra_eq]])
        if keep_rows:
            rows_G.append(a_ub[keep_rows])
            rhs_G.append(b_ub[keep_rows])

    fin_ub = np.isfinite(ub[active])
    fin_lb = np.isfinite(lb[active])
    n_bound = int(np.sum(fin_ub) + np.sum(fin_lb))
    if n_bound:
        r_ids = np.arange(n_bound)
        c_ids = np.concatenate([np.flatnonzero(fin_ub), np.flatnonzero(fin_lb)])
        data = np.concatenate([np.ones(int(np.sum(fin_ub))), -np.ones(int(np.sum(fin_lb)))])
        bound_rhs = np.concatenate([ub[active][fin_ub], -lb[active][fin_lb]])
        rows_G.append(sp.csr_matrix((data, (r_ids, c_ids)), shape=(n_bound, na)))
        rhs_G.append(bound_rhs)

    dims_l = sum(m.shape[0] for m in rows_G)

    # each quadratic row becomes a 4-dim cone (t0, X, Y, t3)
    cone_rows = sp.lil_matrix((4 * program.num_cones, na))
    cone_rhs = np.zeros(4 * program.num_cones)
    u_red, u_rhs = split(program.cone_u, -program.cone_u_const)
    for ci in range(program.num_cones):
        base = 4 * ci
        uc = -u_rhs[ci]  # total constant of the u form after substitution
        urow = u_red.getrow(ci)
        for col, val in zip(urow.indices, urow.data):
            cone_rows[base + 0, col] = -0.5 * val
            cone_rows[base + 3, col] = -0.5 * val
        cone_rhs[base + 0] = 0.5 * (uc + 1.0)
        cone_rhs[base + 3] = 0.5 * (uc - 1.0)
        for off, slot in ((1, program.cone_x[ci]), (2, program.cone_y[ci])):
            if slot in pos:
                cone_rows[base + off, pos[slot]] = -1.0
                cone_rhs[base + off] = 0.0
            else:
                cone_rhs[base + off] = fixed_values[slot]
    if program.num_cones:
        rows_G.append(cone_rows.tocsr())
        rhs_G.append(cone_rhs)

    if rows_G:
        G = sp.vstack(rows_G).tocsr()
        h = np.concatenate(rhs_G)
    else:
        G = sp.csr_matrix((0, na))
        h = np.zeros(0)

    c = -program.c[active].astype(float)  # minimize form
    obj_offset = float(program.c @ subst)

    # Ruiz equilibration; cone blocks share one row scale to stay cones
    col_scale = np.ones(na)

    def _group_max(values, groups, size):
        out = np.zeros(size)
        if values.size:
            np.maximum.at(out, groups, np.abs(values))
        return out

    if a_eq.nnz or G.nnz:
        for _ in range(3):
            csc = sp.vstack([a_eq, G]).tocsc()
            colmax = _group_max(csc.data, np.repeat(np.arange(na), np.diff(csc.indptr)), na)
            cs = np.where(colmax > 0, 1.0 / np.sqrt(np.maximum(colmax, 1e-300)), 1.0)
            a_eq = a_eq.multiply(cs[None, :]).tocsr()
            G = G.multiply(cs[None, :]).tocsr()
            col_scale *= cs
            if a_eq.shape[0]:
                rowmax = _group_max(a_eq.data, np.repeat(np.arange(a_eq.shape[0]),
                                                         np.diff(a_eq.indptr)), a_eq.shape[0])
                rs = np.where(rowmax > 0, 1.0 / np.sqrt(np.maximum(rowmax, 1e-300)), 1.0)
                a_eq = sp.diags(rs) @ a_eq
                b_eq = rs * b_eq
            if G.shape[0]:
                rowmax = _group_max(G.data, np.repeat(np.arange(G.shape[0]),
                                                      np.diff(G.indptr)), G.shape[0])
                rs = np.where(rowmax > 0, 1.0 / np.sqrt(np.maximum(rowmax, 1e-300)), 1.0)
                for ci in range(program.num_cones):
                    rows = slice(dims_l + 4 * ci, dims_l + 4 * ci + 4)
                    peak = max(np.max(rowmax[rows], initial=0.0),
                               np.max(np.abs(h[rows]), initial=0.0))
                    rs[rows] = 1.0 / np.sqrt(peak) if peak > 0 else 1.0
                G = sp.diags(rs) @ G
                h = rs * h
    c = c * col_scale
    peak_c = np.max(np.abs(c), initial=0.0)
    obj_scale = 1.0 / peak_c if peak_c > 1e-12 else 1.0
    c = c * obj_scale

    return _StandardForm(c=c, A=a_eq.tocsr(), b=b_eq, G=G.tocsr(), h=h,
                         dims_l=dims_l, n_cones=program.num_cones,
                         active=active, fixed_values=fixed_values,
                         col_scale=col_scale, obj_scale=obj_scale,
                         obj_offset=obj_offset)


# ---------------------------------------------------------------------------
# cone algebra for R_+^l x (Q^4)^m


class _Cone:
    def __init__(self, dims_l: int, n_cones: int):
        self.l = dims_l
        self.nc = n_cones
        self.dim = dims_l + 4 * n_cones
        self.degree = dims_l + n_cones

    def blocks(self, v):
        return v[self.l:].reshape(self.nc, 4) if self.nc else v[self.l:].reshape(0, 4)

    def identity(self):
        e = np.zeros(self.dim)
        e[:self.l] = 1.0
        if self.nc:
            e[self.l::4][:] = 0.0
            blk = self.blocks(e)
            blk[:, 0] = 1.0
        return e

    def margin(self, v):
        """Smallest interior margin; positive iff strictly inside."""
        worst = np.inf
        if self.l:
            worst = np.min(v[:self.l])
        if self.nc:
            blk = self.blocks(v)
            soc = blk[:, 0] - np.linalg.norm(blk[:, 1:], axis=1)
            worst = min(worst, np.min(soc))
        return worst

    def prod(self, u, v):
        """Jordan product u o v."""
        out = np.empty(self.dim)
        out[:self.l] = u[:self.l] * v[:self.l]
        if self.nc:
            ub, vb = self.blocks(u), self.blocks(v)
            ob = out[self.l:].reshape(self.nc, 4)
            ob[:, 0] = np.sum(ub * vb, axis=1)
            ob[:, 1:] = ub[:, :1] * vb[:, 1:] + vb[:, :1] * ub[:, 1:]
        return out

    def solve_prod(self, lam, w):
        """u with lam o u = w (arrow-matrix solve per block)."""
        out = np.empty(self.dim)
        out[:self.l] = w[:self.l] / lam[:self.l]
        if self.nc:
            lb, wb = self.blocks(lam), self.blocks(w)
            ob = out[self.l:].reshape(self.nc, 4)
            det = lb[:, 0] ** 2 - np.sum(lb[:, 1:] ** 2, axis=1)
            u0 = (lb[:, 0] * wb[:, 0] - np.sum(lb[:, 1:] * wb[:, 1:], axis=1)) / det
            ob[:, 0] = u0
            ob[:, 1:] = (wb[:, 1:] - u0[:, None] * lb[:, 1:]) / lb[:, :1]
        return out

    def max_step(self, v, dv):
        """sup alpha with v + alpha dv in K (v strictly feasible)."""
        alpha = np.inf
        if self.l:
            neg = dv[:self.l] < 0
            if np.any(neg):
                alpha = np.min(-v[:self.l][neg] / dv[:self.l][neg])
        if self.nc == 0:
            return alpha
        vb = self.blocks(v)
        db = self.blocks(dv)
        a = db[:, 0] ** 2 - np.sum(db[:, 1:] ** 2, axis=1)
        bq = 2.0 * (vb[:, 0] * db[:, 0] - np.sum(vb[:, 1:] * db[:, 1:], axis=1))
        cq = vb[:, 0] ** 2 - np.sum(vb[:, 1:] ** 2, axis=1)
        best = np.full(self.nc, np.inf)
        # stable quadratic roots of a r^2 + b r + c = 0 (c > 0 inside)
        lin = np.abs(a) < 1e-14
        with np.errstate(divide="ignore", invalid="ignore"):
            lin_root = np.where(lin & (bq < -1e-14), -cq / bq, np.inf)
            disc = bq * bq - 4.0 * a * cq
            sq = np.sqrt(np.maximum(disc, 0.0))
            qv = -(bq + np.copysign(sq, bq)) / 2.0
            r1 = np.where(~lin & (disc >= 0.0), qv / a, np.inf)
            r2 = np.where(~lin & (disc >= 0.0) & (qv != 0.0), cq / qv, np.inf)
            edge = np.where(db[:, 0] < 0, -vb[:, 0] / db[:, 0], np.inf)
        for roots in (lin_root, r1, r2):
            best = np.minimum(best, np.where(roots > 1e-14, roots, np.inf))
        best = np.minimum(best, edge)
        return min(alpha, float(np.min(best)))


class _Scaling:
    """Nesterov-Todd scaling point for the orthant + SOC product cone.

    Cone blocks are held as stacked (nc, 4, 4) arrays so every apply is
    one batched matmul.
    """

    def __init__(self, cone: _Cone, s, z):
        self.cone = cone
        self.w_orth = np.sqrt(s[:cone.l] / z[:cone.l]) if cone.l else np.zeros(0)
        nc = cone.nc
        if nc == 0:
            self.W_blocks = np.zeros((0, 4, 4))
            self.Winv_blocks = np.zeros((0, 4, 4))
            self.W2_blocks = np.zeros((0, 4, 4))
            self.lam = self.W_apply(z)
            return
        sb = cone.blocks(s)
        zb = cone.blocks(z)
        rs = sb[:, 0] ** 2 - np.sum(sb[:, 1:] ** 2, axis=1)
        rz = zb[:, 0] ** 2 - np.sum(zb[:, 1:] ** 2, axis=1)
        if np.any(rs <= 0.0) or np.any(rz <= 0.0):
            raise FloatingPointError("scaling point left the cone")
        sb_n = sb / np.sqrt(rs)[:, None]
        zb_n = zb / np.sqrt(rz)[:, None]
        zb_nJ = zb_n.copy()
        zb_nJ[:, 1:] *= -1.0
        gamma = np.sqrt((1.0 + np.sum(sb_n * zb_n, axis=1)) / 2.0)
        w = (sb_n + zb_nJ) / (2.0 * gamma[:, None])
        # symmetric square root of the quadratic representation 2ww'-J
        Wu = np.empty((nc, 4, 4))
        Wu[:, 0, 0] = w[:, 0]
        Wu[:, 0, 1:] = w[:, 1:]
        Wu[:, 1:, 0] = w[:, 1:]
        outer = np.einsum("ci,cj->cij", w[:, 1:], w[:, 1:])
        Wu[:, 1:, 1:] = np.eye(3)[None, :, :] + outer / (1.0 + w[:, 0])[:, None, None]
        beta = (rs / rz) ** 0.25
        self.W_blocks = beta[:, None, None] * Wu
        # J Wu J flips the sign of the first row and column off-diagonals
        WuJ = Wu.copy()
        WuJ[:, 0, 1:] *= -1.0
        WuJ[:, 1:, 0] *= -1.0
        self.Winv_blocks = WuJ / beta[:, None, None]
        self.W2_blocks = np.einsum("cij,cjk->cik", self.W_blocks, self.W_blocks)
        self.lam = self.W_apply(z)

    def _blockwise(self, v, orth, mats):
        out = np.empty_like(v)
        lcut = self.cone.l
        out[:lcut] = orth * v[:lcut]
        if self.cone.nc:
            blocks = v[lcut:].reshape(self.cone.nc, 4)
            out[lcut:] = np.einsum("cij,cj->ci", mats, blocks).ravel()
        return out

    def W_apply(self, v):
        return self._blockwise(v, self.w_orth, self.W_blocks)

    def Winv_apply(self, v):
        return self._blockwise(v, 1.0 / self.w_orth, self.Winv_blocks)

    def W2_apply(self, v):
        return self._blockwise(v, self.w_orth**2, self.W2_blocks)


# ---------------------------------------------------------------------------
# homogeneous self-dual interior-point iteration


class _KKT:
    """Sparse LU of the full system [0 A' G'; A 0 0; G 0 -W'W], with
    static regularization and iterative refinement against the
    unregularized matrix. Factoring the 3x3 form (rather than reduced
    normal equations) keeps the conditioning at O(1/mu). The sparsity
    pattern is computed once; each refactorization only rewrites the
    scaling-block values."""

    def __init__(self, form: _StandardForm, reg: float = 1e-9):
        A, G = form.A, form.G
        n, p, m = form.c.size, A.shape[0], G.shape[0]
        self.n, self.p, self.m = n, p, m
        self.A, self.G = A, G
        self.AT = A.T.tocsr()
        self.GT = G.T.tocsr()
        self.reg = reg
        dim = n + p + m
        at, gt = A.tocoo(), G.tocoo()
        rows = [at.col, at.row + n, gt.col, gt.row + n + p,
                np.arange(n), np.arange(p) + n]
        cols = [at.row + n, at.col, gt.row + n + p, gt.col,
                np.arange(n), np.arange(p) + n]
        data = [at.data, at.data, gt.data, gt.data,
                np.full(n, reg), np.full(p, -reg)]
        # scaling block: orthant diagonal then dense 4x4 cone blocks
        l, nc = form.dims_l, form.n_cones
        w_rows = [np.arange(l) + n + p]
        w_cols = [np.arange(l) + n + p]
        for ci in range(nc):
            base = n + p + l + 4 * ci
            r, c = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
            w_rows.append((base + r).ravel())
            w_cols.append((base + c).ravel())
        w_rows = np.concatenate(w_rows)
        w_cols = np.concatenate(w_cols)
        rows.append(w_rows)
        cols.append(w_cols)
        data.append(np.zeros(w_rows.size))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        self._template = np.concatenate(data)
        self._w_range = slice(self._template.size - w_rows.size, self._template.size)
        order = np.lexsort((rows, cols))
        self._order = order
        self._indices = rows[order].astype(np.int32)
        counts = np.bincount(cols, minlength=dim)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self._dim = dim
        self.scal = None
        self.lu = None

    def factor(self, scaling: _Scaling):
        self.scal = scaling
        l, nc = scaling.cone.l, scaling.cone.nc
        vals = np.empty(l + 16 * nc)
        vals[:l] = -(scaling.w_orth**2) - self.reg
        if nc:
            blocks = -np.asarray(scaling.W2_blocks).copy()
            blocks[:, np.arange(4), np.arange(4)] -= self.reg
            vals[l:] = blocks.reshape(-1)
        data = self._template.copy()
        data[self._w_range] = vals
        K = sp.csc_matrix((data[self._order], self._indices, self._indptr),
                          shape=(self._dim, self._dim))
        self.lu = sp.linalg.splu(K, permc_spec="MMD_AT_PLUS_A",
                                 options=dict(SymmetricMode=True, DiagPivotThresh=0.1))

    def _apply_truth(self, sol):
        n, p = self.n, self.p
        x, y, z = sol[:n], sol[n:n + p], sol[n + p:]
        top = (self.AT @ y if p else 0.0) + self.GT @ z
        mid = self.A @ x if p else np.zeros(0)
        bot = self.G @ x - self.scal.W2_apply(z)
        return np.concatenate([top, mid, bot])

    def solve3(self, bx, by, bz, refine: int = 2):
        n, p = self.n, self.p
        rhs = np.concatenate([bx, by, bz])
        sol = self.lu.solve(rhs)
        for _ in range(refine):
            r = rhs - self._apply_truth(sol)
            sol = sol + self.lu.solve(r)
        return sol[:n], sol[n:n + p], sol[n + p:]


def _ipm(form: _StandardForm, options: SolverOptions):
    """Returns (status, x, dual_cost, iterations) in scaled space."""
    c, A, b, G, h = form.c, form.A, form.b, form.G, form.h
    n, p, m = c.size, A.shape[0], G.shape[0]
    cone = _Cone(form.dims_l, form.n_cones)
    if m == 0:
        # unconstrained except equalities: not expected; treat via lstsq
        if p:
            x = sp.linalg.lsqr(A, b)[0]
            return "optimal", x, float(c @ x), 0
        return ("unbounded" if np.any(c != 0) else "optimal"), np.zeros(n), 0.0, 0

    unit = _Scaling.__new__(_Scaling)
    unit.cone = cone
    unit.w_orth = np.ones(cone.l)
    eye_blocks = np.repeat(np.eye(4)[None, :, :], cone.nc, axis=0)
    unit.W_blocks = eye_blocks
    unit.Winv_blocks = eye_blocks
    unit.W2_blocks = eye_blocks
    kkt = _KKT(form)
    kkt.factor(unit)
    x, _, _ = kkt.solve3(np.zeros(n), b.copy(), h.copy())
    s = h - (G @ x)
    shift = cone.margin(s)
    if shift <= 0:
        s = s + (1.0 - shift) * cone.identity()
    _, y, z = kkt.solve3(-c, np.zeros(p), np.zeros(m))
    shift = cone.margin(z)
    if shift <= 0:
        z = z + (1.0 - shift) * cone.identity()
    if p == 0:
        y = np.zeros(0)
    tau, kappa = 1.0, 1.0

    norm_b = max(1.0, np.linalg.norm(b)) if p else 1.0
    norm_h = max(1.0, np.linalg.norm(h))
    norm_c = max(1.0, np.linalg.norm(c))
    best = None
    since_best = 0
    status = "iteration-limit"
    iters = 0

    for iteration in range(options.max_barrier_iters):
        iters = iteration
        rx = (A.T @ y if p else 0.0) + (G.T @ z) + c * tau
        ry = (A @ x - b * tau) if p else np.zeros(0)
        rz = G @ x + s - h * tau
        rtau = float(c @ x + (b @ y if p else 0.0) + h @ z + kappa)
        mu = (s @ z + tau * kappa) / (cone.degree + 1)

        pres = max(np.linalg.norm(ry) / norm_b if p else 0.0,
                   np.linalg.norm(rz) / norm_h) / tau
        dres = np.linalg.norm(rx) / (norm_c * tau)
        pcost = float(c @ x) / tau
        dcost = float(-(b @ y if p else 0.0) - h @ z) / tau
        gap = float(s @ z) / tau**2
        relgap = gap / max(1.0, abs(pcost), abs(dcost))
        tol = options.barrier_tol
        if pres <= 100 * tol and dres <= 100 * tol and (gap <= tol or relgap <= 100 * tol):
            status = "optimal"
            break
        score = max(pres, dres, relgap)
        if best is None or score < best[0]:
            best = (score, x.copy(), y.copy(), z.copy(), s.copy(), tau, kappa)
            since_best = 0
        else:
            since_best += 1
            if since_best >= 10:
                break

        # certificates of primal/dual infeasibility
        by_hz = float(-((b @ y if p else 0.0) + h @ z))
        if by_hz > 1e-12:
            cert = np.linalg.norm((A.T @ y if p else 0.0) + (G.T @ z)) / (by_hz * norm_c)
            if cert <= options.feas_tol and cone.margin(z) >= -1e-9 * max(1.0, np.linalg.norm(z)) \
                    and tau <= 1e-6 * max(1.0, kappa):
                return "infeasible", None, -np.inf, iteration
        ncx = float(-(c @ x))
        if ncx > 1e-12:
            cert = max(np.linalg.norm(A @ x) / norm_b if p else 0.0,
                       np.linalg.norm(G @ x + s) / norm_h) / ncx
            if cert <= options.feas_tol and tau <= 1e-6 * max(1.0, kappa):
                return "unbounded", None, np.inf, iteration

        try:
            scal = _Scaling(cone, s, z)
            lam = scal.lam
            kkt.factor(scal)
        except (FloatingPointError, RuntimeError):
            break
        v2 = kkt.solve3(-c, b.copy(), h.copy(), refine=1 if mu > 1e-6 else 2)

        refine = 1 if mu > 1e-6 else 2

        def direction(eta, bs, bkappa):
            ds_hat = cone.solve_prod(lam, bs)
            u = kkt.solve3(-eta * rx, -eta * ry, -eta * rz - scal.W_apply(ds_hat),
                           refine=refine)
            d4 = -eta * rtau
            num = d4 - bkappa / tau - float(c @ u[0] + (b @ u[1] if p else 0.0) + h @ u[2])
            den = float(c @ v2[0] + (b @ v2[1] if p else 0.0) + h @ v2[2]) - kappa / tau
            dtau = num / den
            dx = u[0] + dtau * v2[0]
            dy = u[1] + dtau * v2[1]
            dz = u[2] + dtau * v2[2]
            dsv = scal.W_apply(ds_hat) - scal.W2_apply(dz)
            dkappa = (bkappa - kappa * dtau) / tau
            return dx, dy, dz, dsv, dtau, dkappa

        # predictor
        bs_aff = -cone.prod(lam, lam)
        dxa, dya, dza, dsa, dta, dka = direction(1.0, bs_aff, -tau * kappa)
        alpha = min(cone.max_step(s, dsa), cone.max_step(z, dza))
        if dta < 0:
            alpha = min(alpha, -tau / dta)
        if dka < 0:
            alpha = min(alpha, -kappa / dka)
        alpha = min(1.0, alpha)
        mu_aff = ((s + alpha * dsa) @ (z + alpha * dza)
                  + (tau + alpha * dta) * (kappa + alpha * dka)) / (cone.degree + 1)
        sigma = min(1.0, max(0.0, (mu_aff / mu))) ** 3

        # corrector
        corr = cone.prod(scal.Winv_apply(dsa), scal.W_apply(dza))
        bs = sigma * mu * cone.identity() - cone.prod(lam, lam) - corr
        bk = sigma * mu - tau * kappa - dta * dka
        dx, dy, dz, dsv, dtau, dkappa = direction(1.0 - sigma, bs, bk)

        alpha = min(cone.max_step(s, dsv), cone.max_step(z, dz))
        if dtau < 0:
            alpha = min(alpha, -tau / dtau)
        if dkappa < 0:
            alpha = min(alpha, -kappa / dkappa)
        alpha = min(1.0, options.step_fraction * alpha)
        if alpha <= 1e-10:
            break
        x += alpha * dx
        if p:
            y += alpha * dy
        z += alpha * dz
        s += alpha * dsv
        tau += alpha * dtau
        kappa += alpha * dkappa

    else:
        iters = options.max_barrier_iters

    if status != "optimal" and best is not None:
        _, x, y, z, s, tau, kappa = best
        pres = max(np.linalg.norm((A @ x - b * tau)) / norm_b if p else 0.0,
                   np.linalg.norm(G @ x + s - h * tau) / norm_h) / tau
        dres = np.linalg.norm((A.T @ y if p else 0.0) + G.T @ z + c * tau) / (norm_c * tau)
        gap = float(s @ z) / tau**2
        pcost = float(c @ x) / tau
        dcost = float(-(b @ y if p else 0.0) - h @ z) / tau
        relgap = gap / max(1.0, abs(pcost), abs(dcost))
        # accept a mildly looser solve rather than fail the caller
        if pres <= 1e-7 and dres <= 1e-7 and relgap <= 1e-6:
            status = "optimal"

    dual_cost = float(-(b @ y if p else 0.0) - h @ z) / tau
    return status, x / tau, dual_cost, iters + 1


def solve_relaxation(program: ConicProgram, options: SolverOptions | None = None,
                     fixings: dict | None = None) -> RelaxationSolution:
    """Solve the continuous relaxation; integrality marks are ignored.

    `fixings` pins extra slots to values (used by branch-and-bound).
    The returned primal lives in full program space with fixed slots
    substituted.
    """
    options = options or SolverOptions()
    try:
        form = _reduce(program, fixings)
    except _Infeasible:
        return RelaxationSolution(primal=None, objective=-np.inf, status="infeasible",
                                  max_violation=np.inf, dual_bound=-np.inf)
    if form.active.size == 0:
        x_full = form.fixed_values.copy()
        rep = verify_feasibility(program, x_full, options.feas_tol)
        if rep.ok(options.feas_tol, include_integrality=False):
            obj = float(program.c @ x_full)
            return RelaxationSolution(primal=x_full, objective=obj, status="optimal",
                                      max_violation=rep.max_violation(False), dual_bound=obj)
        return RelaxationSolution(primal=None, objective=-np.inf, status="infeasible",
                                  max_violation=rep.max_violation(False), dual_bound=-np.inf)

    status, x_hat, dual_cost, iters = _ipm(form, options)
    if status == "infeasible":
        return RelaxationSolution(primal=None, objective=-np.inf, status="infeasible",
                                  max_violation=np.inf, dual_bound=-np.inf, iterations=iters)
    if status == "unbounded":
        return RelaxationSolution(primal=None, objective=np.inf, status="unbounded",
                                  max_violation=np.inf, dual_bound=np.inf, iterations=iters)

    x_full = form.fixed_values.copy()
    x_full[form.active] = form.col_scale * x_hat
    np.clip(x_full, program.lb, program.ub, out=x_full)
    rep = verify_feasibility(program, x_full, options.feas_tol)
    maxviol = rep.max_violation(include_integrality=False)
    objective = float(program.c @ x_full)
    # dual objective of the min form lower-bounds it; negate for the max
    dual_bound = -(dual_cost / form.obj_scale) + form.obj_offset
    if status == "optimal" and maxviol > options.feas_tol:
        status = "iteration-limit"
    return RelaxationSolution(primal=x_full, objective=objective, status=status,
                              max_violation=maxviol,
                              dual_bound=max(dual_bound, objective),
                              iterations=iters)
