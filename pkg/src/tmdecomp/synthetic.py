"""Synthetic traffic matrices with known low-rank, sparse and noise parts.

The deterministic part is a sum of rank-one factors built from rectified
24-hour sinusoids (per-factor phase and shift, plus a shared positive
baseline) times nonnegative magnitude vectors, so the flows share period
and phase structure and differ in magnitude.  Anomalies are rectangular
bursts on random columns; noise is independent zero-mean Gaussian per
column, truncated at six sigma so the nonnegativity guard is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .matrix import TrafficMatrix

__all__ = ["SynthSpec", "SyntheticGroundTruth", "generate"]

_MAX_PLACEMENT_ROUNDS = 1_000_000


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters; equal specs with equal seeds reproduce bit-identically."""

    rows: int
    cols: int
    rank: int
    anomaly_density: float = 0.05
    anomaly_magnitude: tuple[float, float] = (1.0, 3.0)
    anomaly_duration: tuple[int, int] = (3, 12)
    noise_sigma: float | tuple[float, ...] = 0.02
    baseline: float = 1.0
    interval_minutes: float = 15.0
    seed: int = 0
    allow_dips: bool = False

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be at least 1, got {self.rank}")
        if self.rows < 2 or self.cols < 1:
            raise ValueError(f"need rows >= 2 and cols >= 1, got {self.rows}x{self.cols}")
        if not 0.0 <= self.anomaly_density < 1.0:
            raise ValueError(f"anomaly_density must be in [0, 1), got {self.anomaly_density}")
        lo, hi = self.anomaly_magnitude
        if lo <= 0 or hi < lo:
            raise ValueError(f"bad anomaly magnitude range ({lo}, {hi})")
        dlo, dhi = self.anomaly_duration
        if dlo < 1 or dhi < dlo or dhi > self.rows:
            raise ValueError(f"bad anomaly duration range ({dlo}, {dhi})")
        if self.interval_minutes <= 0:
            raise ValueError("interval_minutes must be positive")
        sig = self.sigma_vector()
        if (sig < 0).any():
            raise ValueError("noise sigma must be nonnegative")

    def sigma_vector(self) -> np.ndarray:
        """Per-column noise scales, broadcasting a scalar sigma."""
        sig = np.asarray(self.noise_sigma, dtype=float)
        if sig.ndim == 0:
            return np.full(self.cols, float(sig))
        if sig.shape != (self.cols,):
            raise ValueError(f"need one sigma per column, got shape {sig.shape}")
        return sig


@dataclass(frozen=True)
class SyntheticGroundTruth:
    """A generated matrix bundled with its true components."""

    X: TrafficMatrix
    A_true: np.ndarray
    E_true: np.ndarray
    N_true: np.ndarray
    spec: SynthSpec


def _diurnal_factors(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    """rows x rank profile matrix of rectified, shifted 24h sinusoids."""
    k = np.arange(spec.rows)
    theta = 2.0 * np.pi * k * spec.interval_minutes / (60.0 * 24.0)
    # phases are stratified across the cycle (with jitter) so the rank-one
    # factors stay linearly independent after rectification
    phases = 2.0 * np.pi * (np.arange(spec.rank) + rng.uniform(0.0, 0.5, spec.rank)) / spec.rank
    shifts = rng.uniform(-0.6, 0.9, spec.rank)
    profiles = np.maximum(np.sin(theta[:, None] + phases[None, :]) + shifts[None, :], 0.0)
    return profiles + spec.baseline


def _place_anomalies(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    e = np.zeros((spec.rows, spec.cols))
    target_cells = int(round(spec.anomaly_density * spec.rows * spec.cols))
    if target_cells == 0:
        return e
    covered = np.zeros((spec.rows, spec.cols), dtype=bool)
    lo, hi = spec.anomaly_magnitude
    dlo, dhi = spec.anomaly_duration
    for _ in range(_MAX_PLACEMENT_ROUNDS):
        if covered.sum() >= target_cells:
            return e
        col = int(rng.integers(spec.cols))
        duration = int(rng.integers(dlo, dhi + 1))
        start = int(rng.integers(0, spec.rows - duration + 1))
        magnitude = float(rng.uniform(lo, hi))
        if spec.allow_dips and rng.integers(2) == 0:
            magnitude = -magnitude
        e[start : start + duration, col] = magnitude
        covered[start : start + duration, col] = True
    raise RuntimeError("anomaly placement did not reach the target density")


def generate(spec: SynthSpec) -> SyntheticGroundTruth:
    """Draw one synthetic ground truth instance from ``spec``.

    Raises when the baseline cannot keep X nonnegative at six noise sigmas
    (plus the worst dip, when dips are enabled).
    """
    rng = np.random.default_rng(spec.seed)
    profiles = _diurnal_factors(spec, rng)
    magnitudes = rng.uniform(0.2, 1.8, (spec.rank, spec.cols))
    a_true = profiles @ magnitudes
    e_true = _place_anomalies(spec, rng)
    sigma = spec.sigma_vector()
    n_true = np.clip(rng.normal(0.0, 1.0, (spec.rows, spec.cols)) * sigma, -6.0 * sigma, 6.0 * sigma)

    dip_allowance = spec.anomaly_magnitude[1] if spec.allow_dips else 0.0
    required = 6.0 * sigma + dip_allowance
    slack = a_true.min(axis=0) - required
    if (slack < 0).any():
        worst = int(np.argmin(slack))
        raise ValueError(
            f"baseline {spec.baseline} cannot guarantee nonnegativity at 6 sigma "
            f"(column {worst}: min A = {a_true[:, worst].min():.6g}, needed {required[worst]:.6g})"
        )

    x = a_true + e_true + n_true
    labels = [f"od{j:03d}" for j in range(spec.cols)]
    matrix = TrafficMatrix(
        values=x,
        interval_minutes=spec.interval_minutes,
        od_labels=labels,
        origin_label=f"synthetic-seed{spec.seed}",
    )
    return SyntheticGroundTruth(X=matrix, A_true=a_true, E_true=e_true, N_true=n_true, spec=spec)


def spec_to_dict(spec: SynthSpec) -> dict:
    """JSON-ready generator parameters (tuples become lists)."""
    out = asdict(spec)
    out["anomaly_magnitude"] = list(spec.anomaly_magnitude)
    out["anomaly_duration"] = list(spec.anomaly_duration)
    if isinstance(spec.noise_sigma, tuple):
        out["noise_sigma"] = list(spec.noise_sigma)
    return out
