"""Scalar root-finding primitives for the solver loops.

These run in the innermost iterations, so they are kept dependency-free and
allocation-free; callers pass plain floats and closures.
"""

import math

_INV_E = math.exp(-1.0)


def bisect_root(fn, lo, hi, rel_tol=1e-10, max_iter=200):
    """Bisect for a zero of ``fn`` on the bracket [lo, hi].

    ``fn(lo)`` and ``fn(hi)`` must have opposite (or zero) signs. Returns the
    midpoint of the final bracket once its width falls below ``rel_tol``
    relative to the midpoint magnitude, or after ``max_iter`` halvings.
    """
    f_lo = fn(lo)
    if f_lo == 0.0:
        return lo
    f_hi = fn(hi)
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise ValueError(f"no sign change on bracket [{lo}, {hi}]")
    positive_at_lo = f_lo > 0.0
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel_tol * max(abs(mid), 1e-300):
            break
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == positive_at_lo:
            lo = mid
        else:
            hi = mid
    return mid


def lambert_w0(x):
    """Principal branch of the Lambert W function, for x >= -1/e.

    Accurate to ~1e-14 relative away from the branch point; near x = -1/e the
    quadratic branch-point conditioning is handled by bisecting in w-space,
    which keeps full absolute precision in w.
    """
    if x < -_INV_E:
        # tolerate floating-point dust just below the branch point
        if x < -_INV_E - 1e-12 * _INV_E:
            raise ValueError(f"lambert_w0 undefined for x={x}")
        return -1.0
    if x == 0.0:
        return 0.0
    if x < -0.25:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
    elif x < 3.0:
        w = math.log1p(x)
    else:
        log_x = math.log(x)
        w = log_x - math.log(log_x)
    if w <= -0.9:
        # Halley divides by (1 + w); stay stable near w = -1 via bisection.
        return bisect_root(lambda t: t * math.exp(t) - x, -1.0, -0.5,
                           rel_tol=1e-16, max_iter=120)
    for _ in range(30):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0))
        w_next = w - step
        if abs(w_next - w) <= 1e-15 * max(abs(w_next), 1e-300):
            w = w_next
            break
        w = w_next
    return w
