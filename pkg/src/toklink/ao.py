"""Alternating optimization over token lengths and bandwidth/power.

Each iteration solves the token-length subproblem exactly for the current
rates, then re-splits bandwidth and power to push the shared latency bound
as low as the budgets allow at the new token lengths. Both half-steps are
exact minimizers of the joint objective in their own block, so the cost is
non-increasing along the trace.
"""

from dataclasses import dataclass

import numpy as np

from .baselines import era_allocation, pbwf_allocation
from .bandwidth_power import min_latency_search
from .errors import FeasibilityContractError
from .system import Allocation, check_allocation, total_cost
from .token_opt import solve_token_lengths

__all__ = ["AOTrace", "solve", "solve_multistart"]


@dataclass(frozen=True)
class AOTrace:
    """Optimization trace: the initial point followed by one entry per
    half-step, each with its cost breakdown."""

    iterations: tuple
    converged: bool

    def _best_index(self):
        # the last iterate under exact arithmetic; selecting the cheapest
        # entry (ties -> latest) shields callers from last-step rounding
        best, best_total = 0, self.iterations[0][1].total
        for i, (_, cost) in enumerate(self.iterations):
            if cost.total <= best_total:
                best, best_total = i, cost.total
        return best

    @property
    def final(self):
        return self.iterations[self._best_index()][0]

    @property
    def final_cost(self):
        return self.iterations[self._best_index()][1]


def solve(devices, cfg, init):
    """Run alternating optimization from the feasible allocation ``init``.

    Raises FeasibilityContractError if ``init`` violates budgets or caps.
    Stops when the relative cost decrease over a full iteration falls below
    cfg.tolerance, or after cfg.max_ao_iters iterations.
    """
    try:
        check_allocation(init, devices, cfg)
    except ValueError as exc:
        raise FeasibilityContractError(f"infeasible initial allocation: {exc}") from exc

    bandwidth = np.array(init.bandwidth, dtype=float)
    power = np.array(init.power, dtype=float)
    trace = [(init, total_cost(init, devices, cfg))]
    prev_total = trace[0][1].total
    converged = False

    for _ in range(cfg.max_ao_iters):
        ts = solve_token_lengths(bandwidth, power, devices, cfg)
        alloc_s = Allocation(bandwidth=bandwidth, power=power,
                             tokens=ts.tokens, aux_latency=ts.aux_latency)
        trace.append((alloc_s, total_cost(alloc_s, devices, cfg)))

        if ts.aux_latency > 0.0 and np.any(ts.tokens > 0.0):
            search = min_latency_search(ts.tokens, devices, cfg, ts.aux_latency)
            feas = search.allocation
            bandwidth = np.array(feas.bandwidth, dtype=float)
            power = np.array(feas.power, dtype=float)
            t_latency = search.min_latency
        else:
            bandwidth = np.zeros(len(devices))
            power = np.zeros(len(devices))
            t_latency = 0.0
        alloc_bp = Allocation(bandwidth=bandwidth, power=power,
                              tokens=ts.tokens, aux_latency=t_latency)
        cost_bp = total_cost(alloc_bp, devices, cfg)
        trace.append((alloc_bp, cost_bp))

        decrease = prev_total - cost_bp.total
        if decrease <= cfg.tolerance * max(abs(prev_total), 1e-300):
            converged = True
            break
        prev_total = cost_bp.total

    return AOTrace(iterations=tuple(trace), converged=converged)


def solve_multistart(devices, cfg):
    """Run the alternating solver from the equal-split and the
    proportional/water-filling starts; return the cheaper trace.

    This guarantees the returned cost never exceeds either baseline's cost
    (each run starts at the baseline allocation and only descends)."""
    traces = [solve(devices, cfg, era_allocation(devices, cfg)),
              solve(devices, cfg, pbwf_allocation(devices, cfg))]
    best = traces[0]
    for trace in traces[1:]:
        if trace.final_cost.total < best.final_cost.total:
            best = trace
    return best
