"""Token-length performance model and its calibration from measured loss data.

The model maps a continuous token length s > 0 to a predicted task loss

    phi(s) = (alpha / s)**beta + gamma

which is convex and decreasing in s for alpha, beta > 0. Calibration fits
(alpha, beta, gamma) to (token_length, loss) pairs by an outer search over
beta and an inner nonnegative least squares in (alpha**beta, gamma).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

BETA_LO = 0.01
BETA_HI = 5.0
_BETA_GRID_POINTS = 240
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PerfModel:
    """Parameters of the loss curve phi(s) = (alpha/s)**beta + gamma."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"PerfModel.{name} must be finite and >= 0, got {value}")


# Demo presets for two-modality scenarios; not calibrated measurements.
VISUAL_PRESET = PerfModel(alpha=128.0, beta=0.9, gamma=0.35)
AUDIO_PRESET = PerfModel(alpha=64.0, beta=0.7, gamma=0.45)


def phi(model, tokens):
    """Predicted loss at token length ``tokens`` (must be > 0)."""
    if tokens <= 0.0:
        raise ValueError(f"phi requires tokens > 0, got {tokens}")
    return (model.alpha / tokens) ** model.beta + model.gamma


def phi_extended(model, tokens):
    """phi with its limit value at tokens == 0 (used by cost evaluation).

    At s = 0 the limit is gamma if alpha == 0, 1 + gamma if beta == 0
    (x**0 == 1 convention), and +inf otherwise.
    """
    if tokens < 0.0:
        raise ValueError(f"tokens must be >= 0, got {tokens}")
    if tokens > 0.0:
        return phi(model, tokens)
    if model.beta == 0.0:
        return 1.0 + model.gamma
    if model.alpha == 0.0:
        return model.gamma
    return math.inf


def phi_derivative(model, tokens):
    """d phi / d s at ``tokens`` (must be > 0). Zero when beta == 0."""
    if tokens <= 0.0:
        raise ValueError(f"phi_derivative requires tokens > 0, got {tokens}")
    if model.beta == 0.0 or model.alpha == 0.0:
        return 0.0
    return -model.beta * model.alpha ** model.beta * tokens ** (-model.beta - 1.0)


@dataclass(frozen=True)
class FitDataset:
    """Measured (token_length, loss) pairs used for calibration."""

    token_lengths: tuple
    losses: tuple

    def __post_init__(self):
        s = tuple(float(v) for v in self.token_lengths)
        losses = tuple(float(v) for v in self.losses)
        object.__setattr__(self, "token_lengths", s)
        object.__setattr__(self, "losses", losses)
        if len(s) != len(losses):
            raise ValueError("token_lengths and losses must have equal length")
        if len(s) < 3:
            raise ValueError(f"need at least 3 calibration points, got {len(s)}")
        if any(v <= 0.0 for v in s):
            raise ValueError("token lengths must be positive")
        if len(set(s)) != len(s):
            raise ValueError("token lengths must be distinct")
        if any(not math.isfinite(v) for v in losses):
            raise ValueError("losses must be finite")


@dataclass(frozen=True)
class FitResult:
    model: PerfModel
    sse: float
    degenerate: bool


def fit_linear_at_beta(data, beta):
    """Best (alpha, gamma) for a fixed beta by nonnegative least squares.

    Regressors are (s**-beta, 1) with coefficients (c, gamma), c = alpha**beta.
    Returns (alpha, gamma, sse).
    """
    s = np.asarray(data.token_lengths, dtype=float)
    losses = np.asarray(data.losses, dtype=float)
    design = np.column_stack([s ** (-beta), np.ones_like(s)])
    coef, _ = nnls(design, losses)
    c, gamma = float(coef[0]), float(coef[1])
    resid = design @ coef - losses
    sse = float(resid @ resid)
    alpha = c ** (1.0 / beta) if c > 0.0 else 0.0
    return alpha, gamma, sse


def fit(data):
    """Calibrate a PerfModel to ``data``.

    Outer coarse grid plus golden-section refinement over beta in
    [BETA_LO, BETA_HI]; inner NNLS per beta. A constant-loss dataset is
    degenerate (beta unidentifiable) and returns the flat model
    (alpha=1, beta=0, gamma=mean loss) with degenerate=True.
    """
    losses = np.asarray(data.losses, dtype=float)
    if float(np.ptp(losses)) == 0.0:
        gamma = float(losses[0])
        model = PerfModel(alpha=1.0, beta=0.0, gamma=gamma)
        sse = float(np.sum((1.0 + gamma - losses) ** 2))
        return FitResult(model=model, sse=sse, degenerate=True)

    grid = np.linspace(BETA_LO, BETA_HI, _BETA_GRID_POINTS)
    sse_grid = np.array([fit_linear_at_beta(data, b)[2] for b in grid])
    best = int(np.argmin(sse_grid))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]

    def sse_at(beta):
        return fit_linear_at_beta(data, beta)[2]

    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = sse_at(x1), sse_at(x2)
    for _ in range(80):
        if b - a <= 1e-10 * max(abs(a), 1.0):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = sse_at(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = sse_at(x2)
    beta = 0.5 * (a + b)
    alpha, gamma, sse = fit_linear_at_beta(data, beta)
    # keep whichever of refined/grid beta measured lower (guards flat regions)
    if sse_grid[best] < sse:
        beta = float(grid[best])
        alpha, gamma, sse = fit_linear_at_beta(data, beta)
    return FitResult(model=PerfModel(alpha=alpha, beta=beta, gamma=gamma),
                     sse=sse, degenerate=False)
