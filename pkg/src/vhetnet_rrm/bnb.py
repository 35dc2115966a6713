"""Best-bound branch-and-bound over the binary subcarrier structure.

Branching fixes one indicator slot per node (most fractional first,
preferring the assignment rows), with logical propagation through the
exactly-N_SC rows, the per-cell exclusivity groups, and the product
links. Node bounds are inherited monotonically from parents, so the
tree never reports a child above its parent. Search order and all tie
breaks are deterministic.
"""

import heapq
from dataclasses import dataclass

import numpy as np

from .socp import RelaxationSolution, SolverOptions, solve_relaxation, verify_feasibility
from .transform import ConicProgram

INT_TOL = 1e-6


@dataclass
class BnBResult:
    primal: np.ndarray | None
    objective: float
    bound: float
    gap: float
    nodes: int
    status: str  # optimal | gap-limit | node-limit | infeasible

    @property
    def feasible(self) -> bool:
        return self.primal is not None


def _integral(program: ConicProgram, x: np.ndarray, tol: float = INT_TOL):
    """Most fractional integer slot, or None when integral within tol."""
    slots = np.flatnonzero(program.is_integer)
    if slots.size == 0:
        return None
    vals = x[slots]
    frac = np.abs(vals - np.round(vals))
    if np.max(frac) <= tol:
        return None
    sos_members = set()
    for group in program.sos1_groups:
        sos_members.update(int(g) for g in group)
    candidates = [(s, f) for s, f in zip(slots, frac) if f > tol]
    preferred = [(s, f) for s, f in candidates if s in sos_members]
    pool = preferred or candidates
    best = max(pool, key=lambda sf: (sf[1], -sf[0]))
    return int(best[0])


def _cardinality(program: ConicProgram, gid: int) -> int:
    if gid < len(program.sos1_cardinality):
        return program.sos1_cardinality[gid]
    return 1


def _propagate(program: ConicProgram, fixings: dict) -> dict | None:
    """Close fixings under assignment, exclusivity and product logic.

    Returns None when the logic alone is contradictory.
    """
    fixings = dict(fixings)
    changed = True
    while changed:
        changed = False
        for gid, group in enumerate(program.sos1_groups):
            group = [int(g) for g in group]
            n_sc = _cardinality(program, gid)
            ones = [g for g in group if fixings.get(g) == 1]
            zeros = [g for g in group if fixings.get(g) == 0]
            free = [g for g in group if g not in fixings]
            if len(ones) > n_sc or len(zeros) > len(group) - n_sc:
                return None
            if len(ones) == n_sc and free:
                for g in free:
                    fixings[g] = 0
                changed = True
            elif len(group) - len(zeros) == n_sc and free:
                for g in free:
                    fixings[g] = 1
                changed = True
        for group in program.exclusive_groups:
            group = [int(g) for g in group]
            ones = [g for g in group if fixings.get(g) == 1]
            if len(ones) > 1:
                return None
            if ones:
                for g in group:
                    if g not in fixings:
                        fixings[g] = 0
                        changed = True
        for q_slot, f1, f2 in program.product_links:
            v1, v2 = fixings.get(f1), fixings.get(f2)
            want = None
            if v1 == 0 or v2 == 0:
                want = 0
            elif v1 == 1 and v2 == 1:
                want = 1
            if want is not None:
                have = fixings.get(q_slot)
                if have is None:
                    fixings[q_slot] = want
                    changed = True
                elif have != want:
                    return None
    return fixings


def round_and_repair(relaxed: RelaxationSolution, program: ConicProgram,
                     options: SolverOptions | None = None,
                     fixings: dict | None = None) -> RelaxationSolution | None:
    """Greedy integral repair of a relaxed point, then a fixed re-solve.

    Each UE, in descending order of its strongest indicator value, takes
    its best still-available subcarriers within its cell. Returns the
    re-solved fixed relaxation, or None when the greedy pass cannot
    satisfy exclusivity.
    """
    if relaxed.primal is None or not program.sos1_groups:
        return None
    options = options or SolverOptions()
    x = relaxed.primal
    taken = {}  # exclusive-group id -> True once consumed
    slot_group = {}
    for gid, group in enumerate(program.exclusive_groups):
        for s in group:
            slot_group[int(s)] = gid
    order = sorted(
        range(len(program.sos1_groups)),
        key=lambda g: (-float(np.max(x[program.sos1_groups[g]])), g),
    )
    chosen = {}
    for g in order:
        group = [int(s) for s in program.sos1_groups[g]]
        n_sc = _cardinality(program, g)
        ranked = sorted(range(len(group)), key=lambda f: (-x[group[f]], f))
        picks = []
        for f in ranked:
            slot = group[f]
            gid = slot_group.get(slot)
            if gid is not None and taken.get(gid):
                continue
            picks.append(slot)
            if gid is not None:
                taken[gid] = True
            if len(picks) == n_sc:
                break
        if len(picks) < n_sc:
            return None
        for slot in group:
            chosen[slot] = 1.0 if slot in picks else 0.0
    merged = dict(fixings or {})
    for slot, val in chosen.items():
        if merged.get(slot, val) != val:
            return None
        merged[slot] = val
    merged = _propagate(program, merged)
    if merged is None:
        return None
    sol = solve_relaxation(program, options, fixings=merged)
    if sol.status in ("optimal", "iteration-limit") and sol.primal is not None:
        rep = verify_feasibility(program, _round_integers(program, sol.primal))
        if rep.ok(1e-6, include_integrality=False):
            return sol
    return None


def _round_integers(program: ConicProgram, x: np.ndarray) -> np.ndarray:
    out = x.copy()
    mask = program.is_integer
    out[mask] = np.round(out[mask])
    return out


def _dive(program: ConicProgram, options: SolverOptions, root: RelaxationSolution):
    """Depth-first rounding: repeatedly pin the most decided assignment
    group to its strongest subcarrier (next-best on failure) and
    re-solve, yielding a feasible integral point in about one solve per
    group. Returns a RelaxationSolution or None."""
    fixings = _propagate(program, {})
    sol = root
    if fixings is None or sol.primal is None:
        return None
    while True:
        x = sol.primal
        undecided = []
        for gid, group in enumerate(program.sos1_groups):
            group = [int(s) for s in group]
            if any(s not in fixings for s in group):
                undecided.append((float(np.max(x[group])), gid, group))
        if not undecided:
            frac = _integral(program, x)
            if frac is not None:
                return None
            return sol
        undecided.sort(key=lambda t: (-t[0], t[1]))
        _, gid, group = undecided[0]
        n_sc = _cardinality(program, gid)
        ranked = sorted(range(len(group)), key=lambda f: (-x[group[f]], f))
        advanced = False
        for f in ranked:
            trial = dict(fixings)
            picks = set()
            for ff in [f] + [g for g in ranked if g != f]:
                slot = group[ff]
                if trial.get(slot) == 0:
                    continue
                picks.add(slot)
                if len(picks) == n_sc:
                    break
            if len(picks) < n_sc:
                continue
            for slot in group:
                trial[slot] = 1.0 if slot in picks else 0.0
            trial = _propagate(program, trial)
            if trial is None:
                continue
            cand = solve_relaxation(program, options, fixings=trial)
            if cand.status in ("optimal", "iteration-limit") and cand.primal is not None \
                    and cand.max_violation <= 1e-5:
                fixings, sol = trial, cand
                advanced = True
                break
        if not advanced:
            return None


def _one_opt(program: ConicProgram, options: SolverOptions, incumbent: np.ndarray):
    """Single-reassignment local search around an integral incumbent.

    Moves one assignment group to another subcarrier (swapping with the
    in-cell occupant when needed) and re-solves the fully fixed program;
    repeats while the objective improves. Only used after a truncated
    search; requires one-of-each groups.
    """
    if any(_cardinality(program, g) != 1 for g in range(len(program.sos1_groups))):
        return None
    slot_group = {}
    for gid, group in enumerate(program.exclusive_groups):
        for s in group:
            slot_group[int(s)] = gid
    groups = [[int(s) for s in g] for g in program.sos1_groups]

    def assignment_of(x):
        return [int(np.argmax(x[g])) for g in groups]

    def solve_assignment(choice):
        fixings = {}
        for g, f in enumerate(choice):
            for pos, slot in enumerate(groups[g]):
                fixings[slot] = 1.0 if pos == f else 0.0
        fixings = _propagate(program, fixings)
        if fixings is None:
            return None
        sol = solve_relaxation(program, options, fixings=fixings)
        if sol.status in ("optimal", "iteration-limit") and sol.primal is not None \
                and sol.max_violation <= 1e-5:
            cand = _round_integers(program, sol.primal)
            if verify_feasibility(program, cand).ok(1e-5):
                return cand, float(program.c @ cand)
        return None

    best_x = incumbent
    best_obj = float(program.c @ incumbent)
    choice = assignment_of(incumbent)
    occupant = {}
    for g, f in enumerate(choice):
        gid = slot_group.get(groups[g][f])
        if gid is not None:
            occupant[gid] = g
    for _ in range(4):
        improved = False
        for g in range(len(groups)):
            for f_new in range(len(groups[g])):
                if f_new == choice[g]:
                    continue
                trial = list(choice)
                gid_new = slot_group.get(groups[g][f_new])
                trial[g] = f_new
                if gid_new is not None and gid_new in occupant and occupant[gid_new] != g:
                    trial[occupant[gid_new]] = choice[g]
                out = solve_assignment(trial)
                if out is not None and out[1] > best_obj + 1e-9 * max(1.0, abs(best_obj)):
                    best_x, best_obj = out
                    choice = trial
                    occupant = {}
                    for gg, ff in enumerate(choice):
                        gid = slot_group.get(groups[gg][ff])
                        if gid is not None:
                            occupant[gid] = gg
                    improved = True
        if not improved:
            break
    return best_x, best_obj


def branch_and_bound(program: ConicProgram, options: SolverOptions | None = None,
                     seed_point: np.ndarray | None = None) -> BnBResult:
    """Exact maximization of a mixed-binary ConicProgram.

    `seed_point` optionally warm-seeds the incumbent with a known
    feasible integral point (checked before use).
    """
    options = options or SolverOptions()
    log = options.node_log

    incumbent = None
    incumbent_obj = -np.inf
    if seed_point is not None:
        rounded = _round_integers(program, seed_point)
        if verify_feasibility(program, rounded).ok(1e-6):
            incumbent = rounded
            incumbent_obj = float(program.c @ rounded)

    root = solve_relaxation(program, options)
    nodes = 1
    if root.status == "infeasible" or root.primal is None:
        return BnBResult(primal=incumbent, objective=incumbent_obj,
                         bound=incumbent_obj if incumbent is not None else -np.inf,
                         gap=0.0, nodes=nodes,
                         status="optimal" if incumbent is not None else "infeasible")

    for heuristic in (round_and_repair(root, program, options),
                      _dive(program, options, root)):
        if heuristic is not None and heuristic.objective > incumbent_obj:
            cand = _round_integers(program, heuristic.primal)
            if verify_feasibility(program, cand).ok(1e-5):
                incumbent = cand
                incumbent_obj = float(program.c @ cand)

    counter = 0
    heap = []

    def push(bound, payload):
        # best bound first; equal bounds dive (deeper first) so an
        # integral incumbent appears early
        nonlocal counter
        depth = payload[1]
        heapq.heappush(heap, (-bound, -depth, counter, payload))
        counter += 1

    def scale():
        return max(1.0, abs(incumbent_obj)) if np.isfinite(incumbent_obj) else 1.0

    def accept(sol):
        nonlocal incumbent, incumbent_obj
        cand = _round_integers(program, sol.primal)
        if verify_feasibility(program, cand).ok(1e-5):
            obj = float(program.c @ cand)
            if obj > incumbent_obj:
                incumbent, incumbent_obj = cand, obj

    def process(sol, node_bound, depth, fixings):
        nonlocal nodes
        if log is not None:
            log.write(f"node {nodes} depth {depth} bound {node_bound!r} "
                      f"incumbent {incumbent_obj!r}\n")
        frac_slot = _integral(program, sol.primal)
        if frac_slot is None:
            accept(sol)
            return
        for value in (1.0, 0.0):
            child = _propagate(program, {**fixings, frac_slot: value})
            if child is not None:
                push(node_bound, (child, depth + 1))

    root_bound = min(root.dual_bound, np.inf)
    process(root, root_bound, 0, _propagate(program, {}) or {})
    status = "optimal"
    best_bound = root_bound

    while heap:
        neg_bound, _, _, (fixings, depth) = heapq.heappop(heap)
        parent_bound = -neg_bound
        best_bound = parent_bound
        if incumbent is not None and parent_bound - incumbent_obj <= options.gap_tol * scale():
            best_bound = max(parent_bound, incumbent_obj)
            status = "gap-limit" if parent_bound - incumbent_obj > 0 else "optimal"
            break
        if nodes >= options.max_nodes:
            status = "node-limit"
            break
        sol = solve_relaxation(program, options, fixings=fixings)
        nodes += 1
        if sol.status == "infeasible" or sol.primal is None:
            continue
        node_bound = min(parent_bound, sol.dual_bound)
        if incumbent is not None and node_bound - incumbent_obj <= options.gap_tol * scale():
            continue
        process(sol, node_bound, depth, fixings)

    if not heap and status == "optimal":
        best_bound = incumbent_obj if incumbent is not None else -np.inf

    if incumbent is None:
        return BnBResult(primal=None, objective=-np.inf, bound=best_bound,
                         gap=np.inf, nodes=nodes, status="infeasible")
    if status in ("node-limit", "gap-limit") and program.sos1_groups:
        polished = _one_opt(program, options, incumbent)
        if polished is not None and polished[1] > incumbent_obj:
            incumbent, incumbent_obj = polished
    gap = max(0.0, best_bound - incumbent_obj) / max(1.0, abs(incumbent_obj))
    return BnBResult(primal=incumbent, objective=incumbent_obj, bound=max(best_bound, incumbent_obj),
                     gap=gap, nodes=nodes, status=status)
