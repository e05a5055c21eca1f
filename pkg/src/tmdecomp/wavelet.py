"""Per-flow Gaussian noise scale estimation from finest-scale wavelet detail.

A single level of an orthogonal discrete wavelet transform is applied to
each time series; the noise scale is the median absolute deviation of the
detail coefficients divided by 0.6745.  Detail coefficients of a smooth
series are essentially pure noise, which makes the estimate robust to the
diurnal trend and to sparse bursts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WaveletConfig",
    "analysis_filters",
    "finest_detail_coefficients",
    "mad_sigma",
    "estimate_sigma",
    "column_sigmas",
]

# Daubechies 10-tap orthonormal scaling filter (5 vanishing moments),
# low-pass analysis taps h_0..h_9.  sum(h) = sqrt(2), sum(h^2) = 1.
_DB5_LOWPASS = np.array(
    [
        0.16010239797419293,
        0.6038292697971896,
        0.7243085284377729,
        0.13842814590132074,
        -0.24229488706638203,
        -0.032244869584638375,
        0.07757149384004572,
        -0.006241490212798274,
        -0.012580751999081999,
        0.0033357252854737712,
    ]
)

_FILTERS = {"db5": _DB5_LOWPASS}

MAD_GAUSSIAN_SCALE = 0.6745


@dataclass(frozen=True)
class WaveletConfig:
    """Wavelet family and boundary handling for the noise estimator."""

    family: str = "db5"
    boundary: str = "periodic"

    def __post_init__(self):
        if self.family not in _FILTERS:
            raise ValueError(f"unknown wavelet family {self.family!r}, have {sorted(_FILTERS)}")
        if self.boundary not in ("periodic", "symmetric"):
            raise ValueError(f"boundary must be 'periodic' or 'symmetric', got {self.boundary!r}")


def analysis_filters(cfg: WaveletConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return the (low-pass, high-pass) analysis pair for ``cfg``.

    The high-pass taps follow the quadrature-mirror relation
    g_k = (-1)^k h_{L-1-k}.
    """
    h = _FILTERS[cfg.family]
    length = len(h)
    g = np.array([(-1) ** k * h[length - 1 - k] for k in range(length)])
    return h, g


def finest_detail_coefficients(x: np.ndarray, cfg: WaveletConfig | None = None) -> np.ndarray:
    """One analysis level of the high-pass branch, downsampled by 2.

    Odd-length inputs drop their final sample first.  Output coefficient
    n is sum_m g[m] * x[2n + m] with indices wrapped (periodic) or
    reflected (symmetric) at the right edge.
    """
    cfg = cfg or WaveletConfig()
    _, g = analysis_filters(cfg)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D series, got shape {x.shape}")
    t = x.shape[0] - (x.shape[0] % 2)
    if t < len(g):
        raise ValueError(f"series length {x.shape[0]} is shorter than the {len(g)}-tap filter")
    x = x[:t]
    idx = 2 * np.arange(t // 2)[:, None] + np.arange(len(g))[None, :]
    if cfg.boundary == "periodic":
        idx = idx % t
    else:  # symmetric half-sample reflection: ..., x[t-2], x[t-1], x[t-1], x[t-2], ...
        idx = np.where(idx >= t, 2 * t - 1 - idx, idx)
    return x[idx] @ g


def mad_sigma(coefficients: np.ndarray) -> float:
    """Median absolute deviation of the coefficients, divided by 0.6745."""
    w = np.asarray(coefficients, dtype=float)
    return float(np.median(np.abs(w - np.median(w))) / MAD_GAUSSIAN_SCALE)


def estimate_sigma(x: np.ndarray, cfg: WaveletConfig | None = None) -> float:
    """Noise scale of one series from its finest-scale detail coefficients."""
    return mad_sigma(finest_detail_coefficients(x, cfg))


def column_sigmas(values: np.ndarray, cfg: WaveletConfig | None = None) -> np.ndarray:
    """Apply :func:`estimate_sigma` to every column of a matrix."""
    values = np.asarray(values, dtype=float)
    return np.array([estimate_sigma(values[:, j], cfg) for j in range(values.shape[1])])
