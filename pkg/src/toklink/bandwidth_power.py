"""Bandwidth/power subproblem for fixed token lengths.

For a latency target T', device m needs power

    f_m(B) = (N0 * B / g_m) * (2**(s_m * q / (B * T')) - 1)

to finish exactly at T'. f_m is strictly decreasing and convex in B, so the
minimum-total-power bandwidth split solves a one-dimensional dual problem:
equalize slopes f_m'(B_m) = -mu subject to per-device brackets
[B_m^min, B_m^max], where B_m^min makes the power cap binding. The slope
equation inverts in closed form through the Lambert W function. The outer
search then bisects T' itself down to the smallest feasible latency.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import FeasibilityContractError
from .numerics import bisect_root, lambert_w0

__all__ = [
    "FeasibilityResult", "LatencySearchResult",
    "min_power_for_bandwidth", "power_curve_derivative",
    "solve_min_total_power", "min_latency_search",
]

_LN2 = math.log(2.0)
_BUDGET_RTOL = 1e-9


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the minimum-total-power problem at a fixed latency."""

    feasible: bool
    bandwidth: np.ndarray
    power: np.ndarray
    total_power: float
    dual_mu: float


@dataclass(frozen=True)
class LatencySearchResult:
    """Smallest latency certified feasible by the bisection."""

    min_latency: float
    allocation: FeasibilityResult
    probes: int


def min_power_for_bandwidth(bandwidth, tokens, t_latency, device, cfg):
    """Exact power for device to move ``tokens`` within ``t_latency`` using
    ``bandwidth``. Zero tokens cost zero power; zero bandwidth with positive
    tokens returns +inf."""
    if t_latency <= 0.0:
        raise ValueError(f"t_latency must be > 0, got {t_latency}")
    if tokens < 0.0:
        raise ValueError(f"tokens must be >= 0, got {tokens}")
    if tokens == 0.0:
        return 0.0
    bandwidth = float(bandwidth)
    if bandwidth <= 0.0:
        return math.inf
    expo = float(tokens) * cfg.bits_per_token / (t_latency * bandwidth)
    if expo > 1023.0:
        return math.inf
    return cfg.noise_psd * bandwidth / device.channel_gain * (2.0 ** expo - 1.0)


def power_curve_derivative(bandwidth, tokens, t_latency, device, cfg):
    """d/dB of min_power_for_bandwidth at ``bandwidth`` (> 0).

    Equals c*(e**u * (1 - u) - 1) with u = a*ln2/B, a = s*q/T', c = N0/g;
    strictly negative for positive tokens, zero for zero tokens.
    """
    if t_latency <= 0.0:
        raise ValueError(f"t_latency must be > 0, got {t_latency}")
    if bandwidth <= 0.0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    if tokens == 0.0:
        return 0.0
    a = tokens * cfg.bits_per_token / t_latency
    c = cfg.noise_psd / device.channel_gain
    u = a * _LN2 / bandwidth
    try:
        return c * (math.exp(u) * (1.0 - u) - 1.0)
    except OverflowError:
        return -math.inf


def _bandwidth_at_slope(mu, a, c):
    """Bandwidth where the power curve has slope -mu (a = s*q/T', c = N0/g).

    Solves e**u * (1 - u) - 1 = -mu/c for u = a*ln2/B via the principal
    Lambert W branch; mu -> 0 gives unbounded bandwidth.
    """
    if mu <= 0.0:
        return math.inf
    u = 1.0 + lambert_w0(-(1.0 - mu / c) / math.e)
    if u <= 0.0:
        return math.inf
    return a * _LN2 / u


def _min_bandwidth_for_power(a, c, power_cap, bandwidth_cap):
    """Smallest B in (0, bandwidth_cap] with f(B) <= power_cap, or None if
    even B = bandwidth_cap needs more than power_cap.

    In u = a*ln2/B the condition f(B) = power_cap reads
    (e**u - 1)/u = power_cap / (c * a * ln2), increasing in u.
    """
    u_cap = a * _LN2 / bandwidth_cap
    rho = power_cap / (c * a * _LN2)

    def h(u):
        try:
            return math.expm1(u) / u - rho
        except OverflowError:
            return math.inf

    h_cap = h(u_cap)
    if h_cap > rho * _BUDGET_RTOL:
        return None
    if h_cap >= 0.0:
        # boundary: full bandwidth needs power_cap to within the budget slack
        return bandwidth_cap
    u_hi = max(u_cap, 1.0)
    for _ in range(60):
        if u_hi >= 700.0 or h(u_hi) > 0.0:
            break
        u_hi *= 2.0
    u_hi = min(u_hi, 700.0)
    if h(u_hi) <= 0.0:
        # power cap astronomically generous; any bandwidth above this works
        return a * _LN2 / u_hi
    u_root = bisect_root(h, u_cap, u_hi, rel_tol=1e-12, max_iter=200)
    return a * _LN2 / u_root


def solve_min_total_power(tokens, t_prime, devices, cfg):
    """Minimum-total-power bandwidth/power split meeting latency ``t_prime``.

    Every device with positive tokens finishes exactly at t_prime; devices
    with zero tokens get zero resources. feasible=False signals that either
    a per-device cap pair or one of the two budgets cannot be met.
    """
    if t_prime <= 0.0:
        raise ValueError(f"t_prime must be > 0, got {t_prime}")
    tokens = np.asarray(tokens, dtype=float)
    m = len(devices)
    bandwidth = np.zeros(m)
    power = np.zeros(m)
    infeasible = FeasibilityResult(feasible=False, bandwidth=np.zeros(m),
                                   power=np.zeros(m), total_power=math.inf,
                                   dual_mu=0.0)

    active = [i for i in range(m) if tokens[i] > 0.0]
    if not active:
        return FeasibilityResult(feasible=True, bandwidth=bandwidth,
                                 power=power, total_power=0.0, dual_mu=0.0)

    q = cfg.bits_per_token
    a_of, c_of, b_min, b_cap = {}, {}, {}, {}
    for i in active:
        dev = devices[i]
        a = tokens[i] * q / t_prime
        c = cfg.noise_psd / dev.channel_gain
        lo = _min_bandwidth_for_power(a, c, dev.max_power, dev.max_bandwidth)
        if lo is None:
            return infeasible
        a_of[i], c_of[i] = a, c
        b_min[i], b_cap[i] = lo, dev.max_bandwidth

    if sum(b_min.values()) > cfg.total_bandwidth * (1.0 + _BUDGET_RTOL):
        return infeasible

    if sum(b_cap.values()) <= cfg.total_bandwidth:
        mu = 0.0
        for i in active:
            bandwidth[i] = b_cap[i]
    else:
        def split_at(mu):
            return {i: min(max(_bandwidth_at_slope(mu, a_of[i], c_of[i]),
                               b_min[i]), b_cap[i])
                    for i in active}

        mu_hi = max(-power_curve_derivative(b_min[i], tokens[i], t_prime,
                                            devices[i], cfg)
                    for i in active)
        lo_mu, hi_mu = 0.0, mu_hi
        for _ in range(200):
            if hi_mu - lo_mu <= 1e-12 * max(hi_mu, 1e-300):
                break
            mid = 0.5 * (lo_mu + hi_mu)
            if sum(split_at(mid).values()) > cfg.total_bandwidth:
                lo_mu = mid
            else:
                hi_mu = mid
        mu = hi_mu
        for i, b in split_at(mu).items():
            bandwidth[i] = b

    for i in active:
        power[i] = min_power_for_bandwidth(bandwidth[i], tokens[i], t_prime,
                                           devices[i], cfg)
    total_power = float(np.sum(power))
    feasible = total_power <= cfg.total_power * (1.0 + _BUDGET_RTOL)
    return FeasibilityResult(feasible=feasible, bandwidth=bandwidth,
                             power=power, total_power=total_power,
                             dual_mu=mu)


def min_latency_search(tokens, devices, cfg, t_upper):
    """Bisect the smallest latency for which solve_min_total_power is
    feasible, starting from a feasible upper bound ``t_upper``.

    Raises FeasibilityContractError if t_upper itself is infeasible (the
    caller promised a feasible starting point). An all-zero token vector is
    feasible at any latency, so the search returns the lower probe floor.
    """
    if t_upper <= 0.0 or not math.isfinite(t_upper):
        raise FeasibilityContractError(
            f"t_upper must be a positive finite latency, got {t_upper}")
    probes = 1
    best = solve_min_total_power(tokens, t_upper, devices, cfg)
    if not best.feasible:
        raise FeasibilityContractError(
            f"latency {t_upper} is not feasible; min_latency_search requires "
            "a feasible upper bound")
    hi = t_upper

    lo = t_upper * 1e-6
    res = solve_min_total_power(tokens, lo, devices, cfg)
    probes += 1
    if res.feasible:
        hi, best = lo, res
        bracketed = False
        for _ in range(12):
            lo *= 0.1
            res = solve_min_total_power(tokens, lo, devices, cfg)
            probes += 1
            if res.feasible:
                hi, best = lo, res
            else:
                bracketed = True
                break
        if not bracketed:
            # latency floor reached without ever turning infeasible
            return LatencySearchResult(min_latency=hi, allocation=best,
                                       probes=probes)

    for _ in range(200):
        if hi - lo <= cfg.tolerance * hi:
            break
        mid = 0.5 * (lo + hi)
        res = solve_min_total_power(tokens, mid, devices, cfg)
        probes += 1
        if res.feasible:
            hi, best = mid, res
        else:
            lo = mid
    return LatencySearchResult(min_latency=hi, allocation=best, probes=probes)
