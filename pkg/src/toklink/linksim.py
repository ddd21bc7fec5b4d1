"""Link-level simulation of the token transmission path.

A device's token matrix is pooled along the token axis, paired into complex
symbols (row-major, two consecutive entries per symbol), scaled by the
amplitude gain h = sqrt(power gain) and the transmit amplitude sqrt(p),
corrupted by circular AWGN, and zero-forcing equalized at the receiver.
Under ZF the residual error statistics have a closed form, which the
simulator is validated against:

    E || Y_hat - Y ||_F**2 = rows * cols * sigma**2 / (2 * p * h**2)
"""

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "TokenMatrix", "ComplexSignal", "LinkConfig",
    "sliding_pool", "modulate", "channel_apply", "equalize_demodulate",
    "reconstruction_loss", "pooled_representative", "contrastive_loss",
    "noise_var_for_snr_db", "zf_mse_expected", "run_reconstruction_trials",
]


@dataclass(frozen=True)
class TokenMatrix:
    """A (tokens x embedding) real matrix as produced by a modality encoder."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"token matrix must be 2-D and nonempty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("token matrix entries must be finite")
        object.__setattr__(self, "data", arr)

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class ComplexSignal:
    """Pair-modulated symbol stream plus the shape needed to demodulate."""

    symbols: np.ndarray
    source_shape: tuple
    padded: bool = False

    def __post_init__(self):
        arr = np.asarray(self.symbols, dtype=complex)
        if arr.ndim != 1:
            raise ValueError("symbols must be a 1-D complex array")
        object.__setattr__(self, "symbols", arr)


@dataclass(frozen=True)
class LinkConfig:
    """Channel and receiver parameters for one simulated link.

    noise_var is the total per-symbol complex noise variance (split evenly
    between real and imaginary parts).
    """

    amplitude_gain: float = 1.0
    power: float = 1.0
    noise_var: float = 0.0
    window: int = 1
    pooling: str = "mean"
    temperature: float = 0.07
    seed: int = 0

    def __post_init__(self):
        if self.amplitude_gain <= 0.0:
            raise ValueError(f"amplitude_gain must be > 0, got {self.amplitude_gain}")
        if self.power <= 0.0:
            raise ValueError(f"power must be > 0, got {self.power}")
        if self.noise_var < 0.0:
            raise ValueError(f"noise_var must be >= 0, got {self.noise_var}")
        if not (isinstance(self.window, int) and self.window >= 1):
            raise ValueError(f"window must be an integer >= 1, got {self.window!r}")
        if self.pooling not in ("mean", "max"):
            raise ValueError(f"pooling must be 'mean' or 'max', got {self.pooling!r}")
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


def sliding_pool(matrix, window, mode="mean"):
    """Compress the token axis by non-overlapping windows of ``window`` rows
    (the last group may be shorter). mode 'mean' averages, 'max' takes the
    per-column maximum."""
    if not (isinstance(window, int) and window >= 1):
        raise ValueError(f"window must be an integer >= 1, got {window!r}")
    if mode not in ("mean", "max"):
        raise ValueError(f"mode must be 'mean' or 'max', got {mode!r}")
    data = matrix.data
    groups = math.ceil(matrix.rows / window)
    out = np.empty((groups, matrix.cols))
    for g in range(groups):
        block = data[g * window:(g + 1) * window]
        out[g] = block.mean(axis=0) if mode == "mean" else block.max(axis=0)
    return TokenMatrix(data=out)


def modulate(matrix):
    """Row-major pair modulation: consecutive entries become the real and
    imaginary parts of one complex symbol; an odd entry count is zero-padded
    (flagged so demodulation can drop the pad)."""
    flat = matrix.data.ravel(order="C")
    padded = flat.size % 2 == 1
    if padded:
        flat = np.concatenate([flat, [0.0]])
    symbols = flat[0::2] + 1j * flat[1::2]
    return ComplexSignal(symbols=symbols,
                         source_shape=(matrix.rows, matrix.cols),
                         padded=padded)


def channel_apply(signal, cfg):
    """Scale by h*sqrt(p) and add circular AWGN with per-symbol variance
    cfg.noise_var, deterministically from cfg.seed."""
    rng = np.random.default_rng(cfg.seed)
    scale = cfg.amplitude_gain * math.sqrt(cfg.power)
    component_std = math.sqrt(cfg.noise_var / 2.0)
    n = signal.symbols.size
    noise_parts = rng.normal(0.0, component_std, size=(2, n)) if n else np.zeros((2, 0))
    noise = noise_parts[0] + 1j * noise_parts[1]
    return ComplexSignal(symbols=scale * signal.symbols + noise,
                         source_shape=signal.source_shape,
                         padded=signal.padded)


def equalize_demodulate(signal, cfg):
    """Zero-forcing equalization (divide by h*sqrt(p)) followed by pair
    demodulation back to the original matrix shape."""
    scale = cfg.amplitude_gain * math.sqrt(cfg.power)
    eq = signal.symbols / scale
    components = np.empty(2 * eq.size)
    components[0::2] = eq.real
    components[1::2] = eq.imag
    rows, cols = signal.source_shape
    total = rows * cols
    if signal.padded:
        components = components[:total]
    if components.size != total:
        raise ValueError(
            f"symbol stream carries {components.size} entries, "
            f"expected {total} for shape {signal.source_shape}")
    return TokenMatrix(data=components.reshape(rows, cols))


def reconstruction_loss(received, sent):
    """Squared Frobenius distance between received and transmitted token
    matrices."""
    if received.data.shape != sent.data.shape:
        raise ValueError(
            f"shape mismatch: {received.data.shape} vs {sent.data.shape}")
    diff = received.data - sent.data
    return float(np.sum(diff * diff))


def pooled_representative(matrix):
    """Column-wise mean vector summarizing a token matrix for alignment."""
    return matrix.data.mean(axis=0)


def contrastive_loss(device_vectors, text_vector, temperature, target_index):
    """Cross-modal alignment loss: softmax over cosine similarities between
    the text vector and every device vector, evaluated at the target device.

    Computed in log-sum-exp form for numerical stability.
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    if not device_vectors:
        raise ValueError("need at least one device vector")
    if not 0 <= target_index < len(device_vectors):
        raise ValueError(f"target_index {target_index} out of range")
    text = np.asarray(text_vector, dtype=float)
    text_norm = float(np.linalg.norm(text))
    if text_norm == 0.0:
        raise ValueError("text vector must be nonzero")
    sims = np.empty(len(device_vectors))
    for i, vec in enumerate(device_vectors):
        v = np.asarray(vec, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValueError(f"device vector {i} must be nonzero")
        sims[i] = float(text @ v) / (text_norm * norm)
    scaled = sims / temperature
    peak = float(np.max(scaled))
    lse = peak + math.log(float(np.sum(np.exp(scaled - peak))))
    return float(lse - scaled[target_index])


def noise_var_for_snr_db(snr_db, power=1.0, amplitude_gain=1.0):
    """Per-symbol noise variance giving the requested receive SNR for
    unit-power symbols."""
    return power * amplitude_gain ** 2 / 10.0 ** (snr_db / 10.0)


def zf_mse_expected(rows, cols, noise_var, power=1.0, amplitude_gain=1.0):
    """Closed-form expected squared Frobenius error after ZF equalization."""
    return rows * cols * noise_var / (2.0 * power * amplitude_gain ** 2)


def run_reconstruction_trials(rows, cols, snr_db, trials, link=None, seed=0):
    """Monte Carlo check of the ZF error statistics.

    Each trial draws a fresh token matrix with unit-power symbol entries,
    pools it with the configured window, runs the modulate/channel/equalize
    chain, and accumulates the squared error against the pooled matrix.
    Returns empirical and closed-form MSE plus their relative gap.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if link is None:
        link = LinkConfig()
    noise_var = noise_var_for_snr_db(snr_db, link.power, link.amplitude_gain)
    total = 0.0
    pooled_rows = math.ceil(rows / link.window)
    for trial in range(trials):
        entropy = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
        data_rng, noise_rng = [np.random.default_rng(s) for s in entropy.spawn(2)]
        tokens = TokenMatrix(data_rng.normal(0.0, math.sqrt(0.5), size=(rows, cols)))
        pooled = sliding_pool(tokens, link.window, link.pooling)
        trial_cfg = replace(link, noise_var=noise_var,
                            seed=noise_rng.integers(0, 2 ** 63 - 1))
        received = equalize_demodulate(
            channel_apply(modulate(pooled), trial_cfg), trial_cfg)
        total += reconstruction_loss(received, pooled)
    empirical = total / trials
    theory = zf_mse_expected(pooled_rows, cols, noise_var,
                             link.power, link.amplitude_gain)
    rel_error = abs(empirical - theory) / theory if theory > 0.0 else 0.0
    return {
        "rows": rows, "cols": cols, "pooled_rows": pooled_rows,
        "window": link.window, "snr_db": snr_db, "trials": trials,
        "noise_var": noise_var, "empirical_mse": empirical,
        "theoretical_mse": theory, "relative_error": rel_error,
    }
