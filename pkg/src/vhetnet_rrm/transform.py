"""Exact convex-iteration subproblem built from an OptimizationInstance.

The max-min SINR program is reformulated with: an epigraph variable for
the min; per-UE slack pairs (z, beta) for the SINR numerator and
denominator; exact box linearizations of the binary-binary and
binary-continuous products; and the quadratic upper bound that turns
the bilinear slack constraint into a second-order cone at a given
positive parameter vector xi.

Internals are noise-normalized: the slack z is carried on the SINR
scale and beta in units of noise power, which keeps every cone row
within a few orders of magnitude of unity. Transmit powers stay in
watts. The variable layout records the scaling so points decode back
to physical units.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .instance import OptimizationInstance

Symbol = tuple
LIFT_XI_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class ScaParameters:
    """Positive per-UE convexification parameters."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim != 1 or np.any(xi <= 0.0) or not np.all(np.isfinite(xi)):
            raise ValueError("xi must be a vector of positive finite scalars")
        object.__setattr__(self, "xi", xi)


def sca_bound(z: float, beta: float, xi: float) -> float:
    """Convex upper bound (xi/2) beta^2 + z^2 / (2 xi) on the product z*beta.

    Dominates z*beta for every xi > 0; tight exactly at xi = z/beta.
    """
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    return 0.5 * xi * beta * beta + z * z / (2.0 * xi)


def rlt_q_rows(i: int, k: int, f: int):
    """Box rows forcing q = F_i * F_k at binary points (<= sense).

    Returns rows as (terms, rhs) with terms a list of (symbol, coef).
    """
    if i == k:
        raise ValueError("product indicator requires two distinct UEs")
    q = ("q", i, k, f)
    fi = ("F", i, f)
    fk = ("F", k, f)
    return [
        ([(q, 1.0), (fi, -1.0)], 0.0),
        ([(q, 1.0), (fk, -1.0)], 0.0),
        ([(fi, 1.0), (fk, 1.0), (q, -1.0)], 1.0),
    ]


def rlt_t_rows(i: int, f: int, p_max: float):
    """Box rows forcing t = F * P_i given P_i in [0, p_max] (<= sense)."""
    t = ("t", i, f)
    fi = ("F", i, f)
    p = ("P", i)
    return [
        ([(t, -1.0)], 0.0),
        ([(t, 1.0), (fi, -p_max)], 0.0),
        ([(t, 1.0), (p, -1.0)], 0.0),
        ([(p, 1.0), (t, -1.0), (fi, p_max)], p_max),
    ]


def rlt_s_rows(i: int, k: int, f: int, p_max: float):
    """Box rows forcing s = q * P_k given P_k in [0, p_max] (<= sense)."""
    s = ("s", i, k, f)
    q = ("q", i, k, f)
    p = ("P", k)
    return [
        ([(s, -1.0)], 0.0),
        ([(s, 1.0), (q, -p_max)], 0.0),
        ([(s, 1.0), (p, -1.0)], 0.0),
        ([(p, 1.0), (s, -1.0), (q, p_max)], p_max),
    ]


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """Standard-form container: maximize c'x over linear rows, rotated
    second-order-cone blocks x^2 + y^2 <= u(x), bounds and integrality.

    Immutable after assembly; arrays are not to be modified.
    """

    c: np.ndarray
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    a_ub: sp.csr_matrix
    b_ub: np.ndarray
    cone_x: np.ndarray          # slot of the first squared term, per cone
    cone_y: np.ndarray          # slot of the second squared term
    cone_u: sp.csr_matrix       # linear form bounded below by the squares
    cone_u_const: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    is_integer: np.ndarray
    sos1_groups: tuple = ()
    sos1_cardinality: tuple = ()   # required ones per sos1 group
    exclusive_groups: tuple = ()
    product_links: tuple = ()      # (product slot, factor slot, factor slot)
    var_names: tuple = ()

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def num_cones(self) -> int:
        return self.cone_x.shape[0]

    def dump(self) -> str:
        """Plain-text standard form; one line per row/cone/bound."""
        out = [f"vars {self.num_vars}"]
        for idx, name in enumerate(self.var_names):
            tag = "int" if self.is_integer[idx] else "cont"
            out.append(f"var {idx} {name} {tag} lb {self.lb[idx]!r} ub {self.ub[idx]!r}")
        for label, mat, rhs in (("eq", self.a_eq, self.b_eq), ("le", self.a_ub, self.b_ub)):
            m = mat.tocoo()
            rows = [[] for _ in range(mat.shape[0])]
            for r, c_, v in zip(m.row, m.col, m.data):
                rows[r].append(f"{c_}:{v!r}")
            for r, terms in enumerate(rows):
                out.append(f"{label} {r} {' '.join(terms)} rhs {rhs[r]!r}")
        u = self.cone_u.tocoo()
        forms = [[] for _ in range(self.num_cones)]
        for r, c_, v in zip(u.row, u.col, u.data):
            forms[r].append(f"{c_}:{v!r}")
        for r in range(self.num_cones):
            out.append(f"cone {r} x {self.cone_x[r]} y {self.cone_y[r]} "
                       f"u {' '.join(forms[r])} const {self.cone_u_const[r]!r}")
        for g, slots in enumerate(self.sos1_groups):
            out.append(f"sos1 {g} {' '.join(map(str, slots))}")
        return "\n".join(out) + "\n"


@dataclass
class AllocationPoint:
    """Decoded subproblem point in semantic units.

    F, q are relaxed indicator values; P, t, s are watts; z is on the
    SINR scale and beta in noise-power units; tau is the epigraph value.
    """

    F: np.ndarray
    P: np.ndarray
    q: np.ndarray
    t: np.ndarray
    s: np.ndarray
    z: np.ndarray
    beta: np.ndarray
    tau: float


@dataclass(frozen=True, eq=False)
class VariableLayout:
    """Bijection between subproblem symbols and solver slots.

    Symbols absent from `slots` are constants of the assembly mode (or
    eliminated products) and are reconstructed by `decode`.
    """

    mode: str
    num_ues: int
    num_subcarriers: int
    slots: dict
    names: tuple
    xi: np.ndarray
    cross_pairs: tuple
    cone_ref: np.ndarray = None   # per-UE power normalizer of the cone rows
    fixed_f: np.ndarray | None = None
    fixed_p: np.ndarray | None = None

    @property
    def num_vars(self) -> int:
        return len(self.names)

    def _ref(self, i: int) -> float:
        return 1.0 if self.cone_ref is None else float(self.cone_ref[i])

    def z_scale(self, i: int) -> float:
        return math.sqrt(2.0 * self.xi[i] * self._ref(i))

    def beta_scale(self, i: int) -> float:
        return math.sqrt(2.0 * self._ref(i) / self.xi[i])

    def slot(self, *symbol) -> int:
        return self.slots[symbol]

    def decode(self, x: np.ndarray) -> AllocationPoint:
        n, nf = self.num_ues, self.num_subcarriers
        if self.mode == "fixed_f":
            F = self.fixed_f.astype(float).copy()
        else:
            F = np.array([[x[self.slots[("F", i, f)]] for f in range(nf)] for i in range(n)])
        if self.mode == "fixed_p":
            P = self.fixed_p.copy()
        else:
            P = np.array([x[self.slots[("P", i)]] for i in range(n)])
        q = np.zeros((n, n, nf))
        s = np.zeros((n, n, nf))
        for (i, k) in self.cross_pairs:
            for f in range(nf):
                if ("q", i, k, f) in self.slots:
                    q[i, k, f] = x[self.slots[("q", i, k, f)]]
                else:
                    q[i, k, f] = F[i, f] * F[k, f]
                if ("s", i, k, f) in self.slots:
                    s[i, k, f] = x[self.slots[("s", i, k, f)]]
                else:
                    s[i, k, f] = q[i, k, f] * P[k]
        if self.mode == "full":
            t = np.array([[x[self.slots[("t", i, f)]] for f in range(nf)] for i in range(n)])
        else:
            t = F * P[:, None]
        z = np.array([x[self.slots[("z", i)]] * self.z_scale(i) for i in range(n)])
        beta = np.array([x[self.slots[("beta", i)]] * self.beta_scale(i) for i in range(n)])
        tau = float(x[self.slots[("tau",)]])
        return AllocationPoint(F=F, P=P, q=q, t=t, s=s, z=z, beta=beta, tau=tau)

    def encode(self, point: AllocationPoint) -> np.ndarray:
        x = np.zeros(self.num_vars)
        for symbol, slot in self.slots.items():
            kind = symbol[0]
            if kind == "F":
                x[slot] = point.F[symbol[1], symbol[2]]
            elif kind == "P":
                x[slot] = point.P[symbol[1]]
            elif kind == "q":
                x[slot] = point.q[symbol[1], symbol[2], symbol[3]]
            elif kind == "t":
                x[slot] = point.t[symbol[1], symbol[2]]
            elif kind == "s":
                x[slot] = point.s[symbol[1], symbol[2], symbol[3]]
            elif kind == "z":
                x[slot] = point.z[symbol[1]] / self.z_scale(symbol[1])
            elif kind == "beta":
                x[slot] = point.beta[symbol[1]] / self.beta_scale(symbol[1])
            elif kind == "tau":
                x[slot] = point.tau
        return x


class _Builder:
    """Accumulates rows written over symbols, resolving each symbol to a
    slot, a constant, or a short linear expression per the assembly mode."""

    def __init__(self):
        self.names = []
        self.slot_of = {}
        self.resolvers = {}
        self.lb = []
        self.ub = []
        self.integer = []
        self.eq_rows, self.eq_rhs = [], []
        self.ub_rows, self.ub_rhs = [], []
        self.cones = []
        self.objective = {}

    def add_var(self, symbol, lb=0.0, ub=np.inf, integer=False, name=None):
        slot = len(self.names)
        self.slot_of[symbol] = slot
        self.names.append(name or "_".join(str(p) for p in symbol))
        self.lb.append(lb)
        self.ub.append(ub)
        self.integer.append(integer)
        return slot

    def fix(self, symbol, value):
        self.resolvers[symbol] = ([], float(value))

    def alias(self, symbol, terms, const=0.0):
        """Resolve symbol to a linear expression over other symbols."""
        self.resolvers[symbol] = (list(terms), float(const))

    def _resolve(self, terms):
        """Flatten symbol terms into (slot coefficient dict, constant)."""
        coeffs, const = {}, 0.0
        stack = list(terms)
        while stack:
            symbol, coef = stack.pop()
            if symbol in self.slot_of:
                slot = self.slot_of[symbol]
                coeffs[slot] = coeffs.get(slot, 0.0) + coef
            elif symbol in self.resolvers:
                sub_terms, sub_const = self.resolvers[symbol]
                const += coef * sub_const
                stack.extend((s, coef * c) for s, c in sub_terms)
            else:
                raise KeyError(f"unresolved symbol {symbol}")
        return coeffs, const

    def add_le(self, terms, rhs):
        coeffs, const = self._resolve(terms)
        rhs = rhs - const
        coeffs = {s: c for s, c in coeffs.items() if c != 0.0}
        if not coeffs:
            if rhs < -1e-9 * max(1.0, abs(const)):
                raise ValueError("fixed value violates constraints")
            return
        if len(coeffs) == 1:
            (slot, coef), = coeffs.items()
            bound = rhs / coef
            if coef > 0:
                self.ub[slot] = min(self.ub[slot], bound)
            else:
                self.lb[slot] = max(self.lb[slot], bound)
            if self.lb[slot] > self.ub[slot] + 1e-9 * max(1.0, abs(self.ub[slot])):
                raise ValueError("fixed value violates constraints")
            return
        self.ub_rows.append(coeffs)
        self.ub_rhs.append(rhs)

    def add_eq(self, terms, rhs):
        coeffs, const = self._resolve(terms)
        rhs = rhs - const
        coeffs = {s: c for s, c in coeffs.items() if c != 0.0}
        if not coeffs:
            if abs(rhs) > 1e-9 * max(1.0, abs(const)):
                raise ValueError("fixed value violates constraints")
            return
        if len(coeffs) == 1:
            (slot, coef), = coeffs.items()
            value = rhs / coef
            if (value < self.lb[slot] - 1e-9) or (value > self.ub[slot] + 1e-9):
                raise ValueError("fixed value violates constraints")
            self.lb[slot] = self.ub[slot] = value
            return
        self.eq_rows.append(coeffs)
        self.eq_rhs.append(rhs)

    def add_cone(self, x_symbol, y_symbol, u_terms, u_const=0.0):
        coeffs, const = self._resolve(u_terms)
        self.cones.append((self.slot_of[x_symbol], self.slot_of[y_symbol], coeffs, const + u_const))

    def build(self, sos1=(), sos1_cardinality=(), exclusive=(), product_links=()) -> ConicProgram:
        n = len(self.names)

        def pack(rows, rhs):
            mat = sp.lil_matrix((len(rows), n))
            for r, coeffs in enumerate(rows):
                for slot, coef in coeffs.items():
                    mat[r, slot] = coef
            return mat.tocsr(), np.asarray(rhs, dtype=float)

        a_eq, b_eq = pack(self.eq_rows, self.eq_rhs)
        a_ub, b_ub = pack(self.ub_rows, self.ub_rhs)
        cone_u = sp.lil_matrix((len(self.cones), n))
        cone_x = np.zeros(len(self.cones), dtype=int)
        cone_y = np.zeros(len(self.cones), dtype=int)
        cone_const = np.zeros(len(self.cones))
        for r, (xs, ys, coeffs, const) in enumerate(self.cones):
            cone_x[r], cone_y[r], cone_const[r] = xs, ys, const
            for slot, coef in coeffs.items():
                cone_u[r, slot] = coef
        c = np.zeros(n)
        for slot, coef in self.objective.items():
            c[slot] = coef
        return ConicProgram(
            c=c, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub,
            cone_x=cone_x, cone_y=cone_y, cone_u=cone_u.tocsr(),
            cone_u_const=cone_const,
            lb=np.asarray(self.lb), ub=np.asarray(self.ub),
            is_integer=np.asarray(self.integer, dtype=bool),
            sos1_groups=tuple(np.asarray(g, dtype=int) for g in sos1),
            sos1_cardinality=tuple(int(k) for k in sos1_cardinality),
            exclusive_groups=tuple(np.asarray(g, dtype=int) for g in exclusive),
            product_links=tuple((int(a), int(b), int(c)) for a, b, c in product_links),
            var_names=tuple(self.names),
        )


def assemble_subproblem(instance: OptimizationInstance, sca: ScaParameters,
                        mode: str = "full",
                        fixed_f: np.ndarray | None = None,
                        fixed_p: np.ndarray | None = None):
    """Build the convex-iteration program for one parameter vector.

    mode: "full" optimizes indicators and powers jointly; "fixed_f"
    freezes the subcarrier matrix (no binaries remain); "fixed_p"
    freezes the power vector. Returns (ConicProgram, VariableLayout).
    """
    params = instance.params
    n, nf = instance.num_ues, instance.num_subcarriers
    xi = sca.xi
    if xi.shape[0] != n:
        raise ValueError("xi length must match the UE count")
    if mode not in ("full", "fixed_f", "fixed_p"):
        raise ValueError(f"unknown mode {mode!r}")
    noise = params.noise_power_w
    haps_served = instance.haps_served()
    p_cap = np.array([instance.power_cap(i) for i in range(n)])
    cross = instance.cross_cell_pairs()
    same = instance.same_cell_pairs()

    if mode == "fixed_f":
        fixed_f = np.asarray(fixed_f)
        if fixed_f.shape != (n, nf) or not np.all(np.isin(fixed_f, (0, 1))):
            raise ValueError("fixed value violates constraints")
    if mode == "fixed_p":
        fixed_p = np.asarray(fixed_p, dtype=float)
        if fixed_p.shape != (n,) or np.any(fixed_p < 0.0):
            raise ValueError("fixed value violates constraints")

    b = _Builder()

    # decision variables by mode; everything else resolves to expressions
    if mode == "fixed_f":
        for i in range(n):
            for f in range(nf):
                b.fix(("F", i, f), fixed_f[i, f])
    else:
        for i in range(n):
            for f in range(nf):
                b.add_var(("F", i, f), lb=0.0, ub=1.0, integer=True)
    if mode == "fixed_p":
        for i in range(n):
            b.fix(("P", i), fixed_p[i])
    else:
        for i in range(n):
            b.add_var(("P", i), lb=0.0, ub=p_cap[i])

    same_set = {(i, k) for i, k in same} | {(k, i) for i, k in same}
    for (i, k) in cross:
        for f in range(nf):
            if mode == "fixed_f":
                b.fix(("q", i, k, f), fixed_f[i, f] * fixed_f[k, f])
            else:
                b.add_var(("q", i, k, f), lb=0.0, ub=1.0, integer=True)
    # same-cell products are presolved to zero on every subcarrier
    for (i, k) in sorted(same_set):
        for f in range(nf):
            b.fix(("q", i, k, f), 0.0)
            b.fix(("s", i, k, f), 0.0)

    for i in range(n):
        for f in range(nf):
            if mode == "full":
                b.add_var(("t", i, f), lb=0.0)
            elif mode == "fixed_f":
                b.alias(("t", i, f), [(("P", i), float(fixed_f[i, f]))])
            else:
                b.alias(("t", i, f), [(("F", i, f), fixed_p[i])])
    for (i, k) in cross:
        for f in range(nf):
            if mode == "full":
                b.add_var(("s", i, k, f), lb=0.0)
            elif mode == "fixed_f":
                b.alias(("s", i, k, f), [(("P", k), float(fixed_f[i, f] * fixed_f[k, f]))])
            else:
                b.alias(("s", i, k, f), [(("q", i, k, f), fixed_p[k])])

    z_slots, beta_slots = [], []
    for i in range(n):
        z_slots.append(b.add_var(("z'", i), lb=0.0, name=f"z'_{i}"))
    for i in range(n):
        beta_slots.append(b.add_var(("beta'", i), lb=0.0, name=f"beta'_{i}"))
    tau = b.add_var(("tau",), lb=-np.inf, name="tau")
    b.objective = {tau: 1.0}

    # per-UE cone normalizer: the full-budget desired power in noise units
    cone_ref = np.empty(n)
    for i in range(n):
        if haps_served[i]:
            peak = instance.desired_haps[i] * p_cap[i] / noise
        else:
            peak = np.sum(instance.desired_terrestrial[i]) * p_cap[i] / noise
        cone_ref[i] = max(peak, 1e-12)
    z_scale = np.sqrt(2.0 * xi * cone_ref)
    beta_scale = np.sqrt(2.0 * cone_ref / xi)
    for i in range(n):
        b.alias(("z", i), [(("z'", i), z_scale[i])])
        b.alias(("beta", i), [(("beta'", i), beta_scale[i])])

    # epigraph of the max-min objective
    for i in range(n):
        b.add_le([(("tau",), 1.0), (("z", i), -1.0)], 0.0)

    # per-UE slack on interference plus noise, in noise units
    for i in range(n):
        terms = [(("beta", i), -1.0)]
        for (vi, k) in cross:
            if vi != i:
                continue
            for f in range(nf):
                w = instance.interference_coefficient(i, k, f)
                if w != 0.0:
                    terms.append((("s", i, k, f), w / noise))
        b.add_le(terms, -1.0)

    # station power budgets (the MBS budget covers all antenna elements)
    serving = instance.association.serving_index
    for j in range(instance.association.num_stations):
        members = np.flatnonzero(serving == j)
        if members.size == 0:
            continue
        if instance.has_haps and j == params.haps_index:
            b.add_le([(("P", int(i)), 1.0) for i in members], params.haps_power_w)
        else:
            b.add_le([(("P", int(i)), float(params.mbs_antennas)) for i in members],
                     params.mbs_power_w)

    # subcarrier cardinality per UE
    for i in range(n):
        b.add_eq([(("F", i, f), 1.0) for f in range(nf)], float(params.subcarriers_per_ue))

    # same-cell orthogonality, aggregated per station and subcarrier
    # (the aggregate dominates the pairwise product rows left after the
    # same-cell q presolve without changing the binary feasible set)
    for j in range(instance.association.num_stations):
        members = np.flatnonzero(serving == j)
        if members.size >= 2:
            for f in range(nf):
                b.add_le([(("F", int(i), f), 1.0) for i in members], 1.0)

    # exact product boxes for the cross-cell interference terms
    for (i, k) in cross:
        for f in range(nf):
            for terms, rhs in rlt_q_rows(i, k, f):
                b.add_le(terms, rhs)
            for terms, rhs in rlt_s_rows(i, k, f, float(p_cap[k])):
                b.add_le(terms, rhs)
    for i in range(n):
        for f in range(nf):
            for terms, rhs in rlt_t_rows(i, f, float(p_cap[i])):
                b.add_le(terms, rhs)

    # aggregated product floors: a UE sharing a subcarrier with a fully
    # loaded station cannot dodge that station's co-channel power, which
    # the pairwise floors alone do not see at fractional indicators
    for i in range(n):
        for j in range(instance.association.num_stations):
            if j == serving[i]:
                continue
            members = [int(k) for k in np.flatnonzero(serving == j)]
            if not members:
                continue
            for f in range(nf):
                terms = [(("F", i, f), 1.0)]
                for k in members:
                    terms.append((("F", k, f), 1.0))
                    terms.append((("q", i, k, f), -1.0))
                b.add_le(terms, 1.0)

    # SINR-numerator cones on the scaled slacks, normalized per UE
    for i in range(n):
        if haps_served[i]:
            u_terms = [(("P", i), instance.desired_haps[i] / (noise * cone_ref[i]))]
        else:
            u_terms = [(("t", i, f), instance.desired_terrestrial[i, f] / (noise * cone_ref[i]))
                       for f in range(nf)]
        b.add_cone(("beta'", i), ("z'", i), u_terms)
        b.add_le([(sym, -coef) for sym, coef in u_terms], 0.0)

    sos1, exclusive, links = [], [], []
    if mode != "fixed_f":
        for i in range(n):
            sos1.append([b.slot_of[("F", i, f)] for f in range(nf)])
        for j in range(instance.association.num_stations):
            members = np.flatnonzero(serving == j)
            if members.size >= 2:
                for f in range(nf):
                    exclusive.append([b.slot_of[("F", int(i), f)] for i in members])
        for (i, k) in cross:
            for f in range(nf):
                links.append((b.slot_of[("q", i, k, f)],
                              b.slot_of[("F", i, f)], b.slot_of[("F", k, f)]))

    program = b.build(sos1=sos1,
                      sos1_cardinality=[params.subcarriers_per_ue] * len(sos1),
                      exclusive=exclusive, product_links=links)
    layout = VariableLayout(
        mode=mode, num_ues=n, num_subcarriers=nf,
        slots={_public(sym): slot for sym, slot in b.slot_of.items()},
        names=program.var_names, xi=xi.copy(),
        cross_pairs=tuple(cross), cone_ref=cone_ref,
        fixed_f=None if fixed_f is None else np.asarray(fixed_f, dtype=int),
        fixed_p=None if fixed_p is None else np.asarray(fixed_p, dtype=float),
    )
    return program, layout


def _public(symbol):
    """Scaled slack slots are addressed by their semantic names."""
    if symbol[0] == "z'":
        return ("z", symbol[1])
    if symbol[0] == "beta'":
        return ("beta", symbol[1])
    return symbol


def desired_power(instance: OptimizationInstance, F: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Received desired power per UE, watts."""
    haps = instance.haps_served()
    terr = np.sum(instance.desired_terrestrial * F, axis=1) * P
    return np.where(haps, instance.desired_haps * P, terr)


def interference_power(instance: OptimizationInstance, F: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Aggregate interference per UE from co-subcarrier transmissions, watts."""
    haps = instance.haps_served()
    share = F @ F.T  # [i, k] = number of shared subcarriers
    flat = instance.interference_haps * share * P[None, :]
    sel = np.einsum("if,kf,ikf->ik", F, F, instance.interference_terrestrial)
    terr = sel * P[None, :]
    contrib = np.where(haps[None, :], flat, terr)
    np.fill_diagonal(contrib, 0.0)
    return np.sum(contrib, axis=1)


def evaluate_sinr(instance: OptimizationInstance, F: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Ground-truth per-UE SINR at a binary subcarrier matrix and power
    vector; this is the trusted evaluator behind every reported metric."""
    F = np.asarray(F, dtype=float)
    P = np.asarray(P, dtype=float)
    pr = desired_power(instance, F, P)
    ii = interference_power(instance, F, P)
    return pr / (ii + instance.params.noise_power_w)


def lift_point(instance: OptimizationInstance, layout: VariableLayout,
               F: np.ndarray, P: np.ndarray) -> AllocationPoint:
    """Extend a feasible integral (F, P) to a full subproblem point.

    Products are set exactly; beta sits at its lower slack and z at the
    largest value the cone admits under the layout's xi.
    """
    F = np.asarray(F, dtype=float)
    P = np.asarray(P, dtype=float)
    noise = instance.params.noise_power_w
    n, nf = layout.num_ues, layout.num_subcarriers
    q = np.einsum("if,kf->ikf", F, F)
    for i in range(n):
        q[i, i, :] = 0.0
    s = q * P[None, :, None]
    t = F * P[:, None]
    beta = (interference_power(instance, F, P) + noise) / noise
    pr_hat = desired_power(instance, F, P) / noise
    xi = layout.xi
    z = np.sqrt(np.maximum(2.0 * xi * (pr_hat - 0.5 * xi * beta**2), 0.0))
    return AllocationPoint(F=F, P=P.copy(), q=q, t=t, s=s, z=z, beta=beta,
                           tau=float(np.min(z)))
