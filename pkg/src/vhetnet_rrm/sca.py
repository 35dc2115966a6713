"""Iterative convex-approximation driver for the joint allocation.

Each round rebuilds the subproblem at the current parameter vector,
solves it exactly (branch-and-bound when indicators are free, a single
conic solve otherwise), and re-tightens the parameters at the solution.
The running point stays feasible for the next round by construction,
which makes the objective non-decreasing until the stopping rule fires.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .allocations import equal_power_vector, greedy_orthogonal_F
from .bnb import branch_and_bound
from .instance import OptimizationInstance
from .socp import SolverOptions, solve_relaxation, verify_feasibility
from .transform import (ScaParameters, assemble_subproblem, evaluate_sinr,
                        interference_power, lift_point)

# positivity guard only: the slack ratio z/beta is already dimensionless
# with beta >= 1, so no magnitude floor is needed; a larger floor would
# cap weak UEs' reachable slack and can render the first subproblem
# infeasible at the starting point
XI_FLOOR = 1e-30


class InfeasibleInstanceError(RuntimeError):
    pass


def se_of(gamma):
    """Spectral efficiency log2(1 + gamma), elementwise."""
    return np.log2(1.0 + np.asarray(gamma, dtype=float))


@dataclass
class ScaIteration:
    index: int
    objective: float
    xi: np.ndarray
    subproblem_gap: float
    wall_time_s: float


@dataclass
class ScaTrace:
    iterations: list = field(default_factory=list)
    status: str = "converged"       # converged | iteration-cap
    feasibility_carryover: float = 0.0  # worst re-check of the previous point

    @property
    def objectives(self):
        return [rec.objective for rec in self.iterations]

    def __len__(self):
        return len(self.iterations)


@dataclass
class SolveResult:
    F: np.ndarray
    P: np.ndarray
    sinr: np.ndarray
    se: np.ndarray
    min_se: float
    objective: float
    trace: ScaTrace

    @property
    def iterations(self) -> int:
        return len(self.trace)


def initialize_xi(instance: OptimizationInstance,
                  F: np.ndarray | None = None,
                  P: np.ndarray | None = None) -> ScaParameters:
    """Tight parameter vector at a feasible starting allocation.

    Defaults to equal power and the greedy orthogonal assignment. The
    returned values make the quadratic bound exact at that point, so
    the first subproblem is feasible and the ascent starts from it.
    """
    params = instance.params
    if F is None:
        F = greedy_orthogonal_F(instance.association, params)
    if P is None:
        P = equal_power_vector(instance.association, params)
    gamma = evaluate_sinr(instance, F, P)
    noise_margin = (interference_power(instance, F, P) + params.noise_power_w) / params.noise_power_w
    return ScaParameters(np.maximum(gamma / noise_margin, XI_FLOOR))


def run_algorithm1(instance: OptimizationInstance,
                   options: SolverOptions | None = None,
                   mode: str = "full",
                   fixed_f: np.ndarray | None = None,
                   fixed_p: np.ndarray | None = None) -> SolveResult:
    """Run the iterative allocation design to convergence or the cap.

    mode "full" optimizes powers and subcarriers jointly; "fixed_f"
    keeps the given subcarrier matrix (pure power control); "fixed_p"
    keeps the given power vector (pure subcarrier optimization).
    """
    options = options or SolverOptions()
    params = instance.params
    sca = initialize_xi(instance,
                        F=fixed_f if mode == "fixed_f" else None,
                        P=fixed_p if mode == "fixed_p" else None)
    trace = ScaTrace()
    best = None          # (tau, point, layout)
    prev_tau = None
    prev_point = None
    rel_tol = params.sca_rel_tol

    for n in range(params.max_sca_iterations):
        started = time.perf_counter()
        program, layout = assemble_subproblem(instance, sca, mode,
                                              fixed_f=fixed_f, fixed_p=fixed_p)
        if prev_point is not None:
            carry = verify_feasibility(program, layout.encode(prev_point))
            trace.feasibility_carryover = max(trace.feasibility_carryover,
                                              carry.max_violation(include_integrality=False))
        if np.any(program.is_integer):
            if prev_point is not None:
                seed = layout.encode(prev_point)
            else:
                F0 = greedy_orthogonal_F(instance.association, params)
                P0 = fixed_p if mode == "fixed_p" else equal_power_vector(instance.association, params)
                seed = layout.encode(lift_point(instance, layout, F0, P0))
            node = branch_and_bound(program, options, seed_point=seed)
            feasible = node.feasible
            objective, gap, primal = node.objective, node.gap, node.primal
        else:
            sol = solve_relaxation(program, options)
            feasible = sol.status in ("optimal", "iteration-limit") and sol.primal is not None
            objective, gap, primal = sol.objective, 0.0, sol.primal
        if not feasible:
            if n == 0:
                raise InfeasibleInstanceError("infeasible instance")
            trace.status = "converged"
            break
        point = layout.decode(primal)
        trace.iterations.append(ScaIteration(
            index=n, objective=float(objective), xi=sca.xi.copy(),
            subproblem_gap=float(gap), wall_time_s=time.perf_counter() - started))
        if best is None or objective > best[0]:
            best = (float(objective), point, layout)
        if prev_tau is not None:
            delta = objective - prev_tau
            if delta < -1e-9 or abs(delta) <= rel_tol * max(1.0, abs(prev_tau)):
                trace.status = "converged"
                prev_tau = objective
                break
        prev_tau = objective
        prev_point = point
        sca = ScaParameters(np.maximum(point.z / np.maximum(point.beta, 1e-30), XI_FLOOR))
    else:
        trace.status = "iteration-cap"

    assert best is not None
    _, point, layout = best
    F_star = np.round(point.F).astype(int)
    P_star = np.maximum(point.P, 0.0)
    gamma = evaluate_sinr(instance, F_star, P_star)
    se = se_of(gamma)
    return SolveResult(F=F_star, P=P_star, sinr=gamma, se=se,
                       min_se=float(np.min(se)), objective=best[0], trace=trace)


def evaluate_fixed_allocation(instance: OptimizationInstance,
                              F: np.ndarray, P: np.ndarray) -> SolveResult:
    """Metrics of a given (F, P) without any optimization (scenario 4)."""
    gamma = evaluate_sinr(instance, F, P)
    se = se_of(gamma)
    trace = ScaTrace(status="converged")
    return SolveResult(F=np.asarray(F, dtype=int), P=np.asarray(P, dtype=float),
                       sinr=gamma, se=se, min_se=float(np.min(se)),
                       objective=float(np.min(gamma)), trace=trace)
