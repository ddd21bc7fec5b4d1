"""Token-length subproblem for fixed bandwidth and power.

With rates R_m fixed, the shared latency bound T pins every token length to
s_m(T) = min(T * R_m / q, S_m^max), collapsing the objective to a function of
T alone. Its descent-direction function

    g(T) = sum_{m : T < S_m^max q / R_m} lam * beta_m
           * (alpha_m * q / R_m)**beta_m / T**(beta_m + 1)  -  (1 - lam)

is strictly decreasing with a downward jump wherever a device hits its cap,
so the unique sign change located by bracketed bisection is the global
optimum; when the sign change is a jump, the optimum sits exactly on that
cap threshold. Determining the cap set from T itself (rather than pruning an
active set iteratively) avoids over-capping devices whose threshold the
solution falls back below.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblemError
from .numerics import bisect_root
from .system import latency, rate

__all__ = ["TokenSolveResult", "stationarity_g", "solve_token_lengths"]

_T_SEED = 1e-9
_REL_TOL = 1e-10
_MAX_ITER = 200


@dataclass(frozen=True)
class TokenSolveResult:
    tokens: np.ndarray
    aux_latency: float
    active_set: frozenset
    stationarity_residual: float


def _device_terms(devices, rates, cfg, active_ids):
    """Per-device constants (C_m, beta_m + 1) for the active-set sum, with
    zero-contribution devices (beta == 0 or alpha == 0) dropped."""
    lam = cfg.lambda_weight
    q = cfg.bits_per_token
    terms = []
    for dev, r in zip(devices, rates):
        if dev.id not in active_ids:
            continue
        beta, alpha = dev.perf.beta, dev.perf.alpha
        if beta == 0.0 or alpha == 0.0:
            continue
        coef = lam * beta * (alpha * q / r) ** beta
        terms.append((coef, beta + 1.0))
    return terms


def stationarity_g(t_latency, devices, rates, cfg, active_ids):
    """Evaluate g(T) over ``active_ids``. Requires t_latency > 0 and a
    positive rate for every active device."""
    if t_latency <= 0.0:
        raise ValueError(f"t_latency must be > 0, got {t_latency}")
    terms = _device_terms(devices, rates, cfg, active_ids)
    return _g_from_terms(terms, t_latency, cfg.lambda_weight)


def _g_from_terms(terms, t_latency, lam):
    total = 0.0
    for coef, expo in terms:
        try:
            total += coef / t_latency ** expo
        except OverflowError:
            return math.inf
    return total - (1.0 - lam)


def solve_token_lengths(bandwidth, power, devices, cfg):
    """Exact minimizer of the fixed-rate objective over (s, T).

    Devices with max_tokens == 0 always get s = 0 and never enter the
    stationarity sum. A zero-rate device with a positive token cap makes
    the instance infeasible (InfeasibleProblemError), except at
    lambda == 0 where nothing is transmitted at all.
    """
    bandwidth = np.asarray(bandwidth, dtype=float)
    power = np.asarray(power, dtype=float)
    m = len(devices)
    lam = cfg.lambda_weight
    q = cfg.bits_per_token
    tokens = np.zeros(m)

    if lam == 0.0:
        # pure latency: sending nothing is optimal (phi term is ignored)
        return TokenSolveResult(tokens=tokens, aux_latency=0.0,
                                active_set=frozenset(),
                                stationarity_residual=0.0)

    rates = [rate(bandwidth[i], power[i], dev.channel_gain, cfg.noise_psd)
             for i, dev in enumerate(devices)]
    for dev, r in zip(devices, rates):
        if dev.max_tokens > 0.0 and r <= 0.0:
            raise InfeasibleProblemError(
                f"device {dev.id} has zero rate but a positive token cap; "
                "no finite-latency allocation exists")

    if lam == 1.0:
        # pure performance: saturate every cap; T is the induced max latency
        for i, dev in enumerate(devices):
            tokens[i] = dev.max_tokens
        t = max((latency(tokens[i], q, rates[i]) for i in range(m)), default=0.0)
        return TokenSolveResult(tokens=tokens, aux_latency=t,
                                active_set=frozenset(),
                                stationarity_residual=0.0)

    # (index, coef, expo, cap-latency threshold); devices whose phi is flat
    # in s (beta == 0 or alpha == 0) gain nothing from tokens and send none
    entries = []
    for i in range(m):
        dev = devices[i]
        if dev.max_tokens <= 0.0 or dev.perf.beta == 0.0 or dev.perf.alpha == 0.0:
            continue
        coef = lam * dev.perf.beta * (dev.perf.alpha * q / rates[i]) ** dev.perf.beta
        entries.append((i, coef, dev.perf.beta + 1.0,
                        dev.max_tokens * q / rates[i]))

    if not entries:
        return TokenSolveResult(tokens=tokens, aux_latency=0.0,
                                active_set=frozenset(),
                                stationarity_residual=0.0)

    def g(t):
        terms = [(coef, expo) for _, coef, expo, thr in entries if t < thr]
        return _g_from_terms(terms, t, lam)

    lo = _T_SEED
    while g(lo) <= 0.0:
        lo *= 0.1
        if lo < 1e-300:
            # no positive mass even as T -> 0+: nothing worth transmitting
            return TokenSolveResult(tokens=tokens, aux_latency=0.0,
                                    active_set=frozenset(),
                                    stationarity_residual=0.0)
    hi = lo * 10.0
    for _ in range(400):
        if g(hi) < 0.0:
            break
        hi *= 10.0
    t = bisect_root(g, lo, hi, rel_tol=_REL_TOL, max_iter=_MAX_ITER)

    # a bisected jump lands within _REL_TOL of its threshold; snap those
    # devices onto the cap so the reported set and residual stay one-sided
    active = set()
    for i, _, _, thr in entries:
        if t >= thr * (1.0 - 1e-9):
            tokens[i] = devices[i].max_tokens
        else:
            tokens[i] = t * rates[i] / q
            active.add(devices[i].id)

    t_latency = 0.0
    for i in range(m):
        if tokens[i] > 0.0:
            t_latency = max(t_latency, tokens[i] * q / rates[i])

    residual = 0.0
    if active:
        terms = [(coef, expo) for i, coef, expo, _ in entries
                 if devices[i].id in active]
        residual = max(0.0, _g_from_terms(terms, t, lam))
    return TokenSolveResult(tokens=tokens, aux_latency=t_latency,
                            active_set=frozenset(active),
                            stationarity_residual=residual)
