"""Reference allocation schemes and a brute-force verification oracle.

The two baselines mirror common static policies: an equal split of both
budgets, and a bandwidth split proportional to each device's token load with
power set by water-filling. Both then pick token lengths optimally, so any
advantage of the alternating solver comes from the resource split alone.

The oracle enumerates budget-saturating splits on a simplex grid (the cost
never increases when a device receives more bandwidth or power, so only the
saturated face needs searching) and keeps the cheapest grid point.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblemError, OracleSizeError
from .system import Allocation, total_cost
from .token_opt import solve_token_lengths

__all__ = ["OracleGrid", "era_allocation", "pbwf_allocation", "oracle_solve"]

_MAX_ORACLE_DEVICES = 3
_MAX_ORACLE_COMBOS = 1_000_000


def _with_tokens(bandwidth, power, devices, cfg):
    ts = solve_token_lengths(bandwidth, power, devices, cfg)
    return Allocation(bandwidth=bandwidth, power=power, tokens=ts.tokens,
                      aux_latency=ts.aux_latency)


def era_allocation(devices, cfg):
    """Equal resource allocation: each device gets budget/K (clamped to its
    caps), with token lengths then chosen optimally."""
    k = len(devices)
    if k == 0:
        raise ValueError("need at least one device")
    bandwidth = np.array([min(cfg.total_bandwidth / k, d.max_bandwidth)
                          for d in devices])
    power = np.array([min(cfg.total_power / k, d.max_power) for d in devices])
    return _with_tokens(bandwidth, power, devices, cfg)


def _proportional_with_caps(total, weights, caps):
    """Split ``total`` proportionally to ``weights`` under per-entry caps;
    excess from clamped entries is redistributed among the rest."""
    k = len(weights)
    out = np.zeros(k)
    open_idx = [i for i in range(k) if weights[i] > 0.0]
    remaining = total
    while open_idx and remaining > 0.0:
        wsum = sum(weights[i] for i in open_idx)
        clamped = []
        for i in open_idx:
            share = remaining * weights[i] / wsum
            if share >= caps[i] - out[i]:
                clamped.append(i)
        if not clamped:
            for i in open_idx:
                out[i] += remaining * weights[i] / wsum
            break
        for i in clamped:
            remaining -= caps[i] - out[i]
            out[i] = caps[i]
            open_idx.remove(i)
        remaining = max(remaining, 0.0)
    return out


def _water_fill(budget, noise_levels, caps):
    """Capped water-filling: p_i = clip(mu - noise_levels[i], 0, caps[i])
    with mu chosen so the powers sum to ``budget`` (or all caps bind)."""
    caps = np.asarray(caps, dtype=float)
    noise_levels = np.asarray(noise_levels, dtype=float)
    if float(np.sum(caps)) <= budget:
        return caps.copy()

    def spent(mu):
        return float(np.sum(np.clip(mu - noise_levels, 0.0, caps)))

    lo = float(np.min(noise_levels))
    hi = lo + budget
    for _ in range(200):
        if spent(hi) >= budget:
            break
        hi = lo + 2.0 * (hi - lo)
    for _ in range(200):
        if hi - lo <= 1e-12 * max(abs(hi), 1e-300):
            break
        mid = 0.5 * (lo + hi)
        if spent(mid) < budget:
            lo = mid
        else:
            hi = mid
    return np.clip(hi - noise_levels, 0.0, caps)


def pbwf_allocation(devices, cfg):
    """Bandwidth proportional to each device's maximum token payload, power
    by water-filling for sum-rate, token lengths then chosen optimally.

    Devices that end up with zero bandwidth are excluded from water-filling
    (their rate is zero at any power)."""
    k = len(devices)
    if k == 0:
        raise ValueError("need at least one device")
    weights = np.array([d.max_tokens * cfg.bits_per_token for d in devices])
    if float(np.sum(weights)) == 0.0:
        weights = np.ones(k)
    bw_caps = np.array([d.max_bandwidth for d in devices])
    bandwidth = _proportional_with_caps(cfg.total_bandwidth, weights, bw_caps)

    power = np.zeros(k)
    wf_idx = [i for i in range(k) if bandwidth[i] > 0.0]
    if wf_idx:
        noise_levels = np.array([cfg.noise_psd * bandwidth[i] / devices[i].channel_gain
                                 for i in wf_idx])
        caps = np.array([devices[i].max_power for i in wf_idx])
        filled = _water_fill(cfg.total_power, noise_levels, caps)
        for j, i in enumerate(wf_idx):
            power[i] = filled[j]
    return _with_tokens(bandwidth, power, devices, cfg)


@dataclass(frozen=True)
class OracleGrid:
    """Grid resolution for the brute-force search. Fractions are i/n for
    i = 0..n, so resolutions that divide each other give nested grids."""

    bandwidth_points: int = 16
    power_points: int = 16

    def __post_init__(self):
        for name in ("bandwidth_points", "power_points"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 8):
                raise ValueError(f"OracleGrid.{name} must be an integer >= 8, got {value!r}")


def _simplex_fractions(k, n):
    """All k-tuples of fractions i/n summing to 1."""
    fr = [i / n for i in range(n + 1)]
    if k == 1:
        return [(1.0,)]
    if k == 2:
        return [(f, 1.0 - f) for f in fr]
    combos = []
    for f1 in fr:
        for f2 in fr:
            rest = 1.0 - f1 - f2
            if rest >= -1e-12:
                combos.append((f1, f2, max(rest, 0.0)))
    return combos


def oracle_solve(devices, cfg, grid=None):
    """Best allocation over the saturated-budget simplex grid.

    Cost is evaluated with token lengths solved exactly per grid point, so
    the result is the true optimum restricted to the grid. Raises
    OracleSizeError for more than 3 devices or an enumeration that would
    exceed the combo limit.
    """
    if grid is None:
        grid = OracleGrid()
    k = len(devices)
    if k == 0:
        raise ValueError("need at least one device")
    if k > _MAX_ORACLE_DEVICES:
        raise OracleSizeError(
            f"brute-force search supports at most {_MAX_ORACLE_DEVICES} devices, got {k}")
    combos_b = _simplex_fractions(k, grid.bandwidth_points)
    combos_p = _simplex_fractions(k, grid.power_points)
    size = len(combos_b) * len(combos_p)
    if size > _MAX_ORACLE_COMBOS:
        raise OracleSizeError(
            f"grid would enumerate {size} combinations "
            f"(limit {_MAX_ORACLE_COMBOS}); reduce the resolution")

    bw_caps = np.array([d.max_bandwidth for d in devices])
    pw_caps = np.array([d.max_power for d in devices])
    best_cost = math.inf
    best = None
    for fb in combos_b:
        bandwidth = np.minimum(np.asarray(fb) * cfg.total_bandwidth, bw_caps)
        for fp in combos_p:
            power = np.minimum(np.asarray(fp) * cfg.total_power, pw_caps)
            try:
                alloc = _with_tokens(bandwidth, power, devices, cfg)
            except InfeasibleProblemError:
                continue
            cost = total_cost(alloc, devices, cfg)
            if cost.total < best_cost:
                best_cost = cost.total
                best = alloc
    if best is None:
        raise InfeasibleProblemError(
            "no grid point yields a finite-cost allocation")
    return best
