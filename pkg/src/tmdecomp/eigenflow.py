"""Classical PCA over a centered traffic matrix and eigenflow classification.

Eigenflows are the unit-norm left singular vectors of the centered matrix.
Each one is tested against three criteria: a Fourier-power argmax at the
12 or 24 hour period (deterministic), any entry beyond five standard
deviations (spike), and a Kolmogorov-Smirnov normality test (noise).
Eigenflows satisfying several criteria are indeterminate, those satisfying
none are non-determinate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

__all__ = [
    "LABEL_D",
    "LABEL_S",
    "LABEL_N",
    "LABEL_INDETERMINATE",
    "LABEL_NON_DETERMINATE",
    "SvdResult",
    "PeriodSet",
    "EigenflowClassification",
    "pca",
    "fourier_power",
    "classify_d",
    "classify_s",
    "classify_n",
    "classify_all",
    "unclassified_energy_rate",
    "rank_r_approximation",
    "classification_summary",
    "classification_report_dict",
]

LABEL_D = "d"
LABEL_S = "s"
LABEL_N = "n"
LABEL_INDETERMINATE = "indeterminate"
LABEL_NON_DETERMINATE = "non_determinate"

ARGMAX_TIE_RTOL = 1e-12
SPIKE_SIGMA_FACTOR = 5.0


def _default_hours() -> frozenset[float]:
    # period parameters in hours: 1..10 plus the even values 12..50
    return frozenset(float(k) for k in range(1, 11)) | frozenset(float(2 * k) for k in range(6, 26))


@dataclass(frozen=True)
class PeriodSet:
    """Candidate periods (hours) scanned by the deterministic criterion."""

    hours: frozenset[float] = field(default_factory=_default_hours)
    target_periods: frozenset[float] = frozenset({12.0, 24.0})

    def __post_init__(self):
        hours = frozenset(float(h) for h in self.hours)
        targets = frozenset(float(h) for h in self.target_periods)
        if not hours:
            raise ValueError("hours must be non-empty")
        if any(h <= 0 for h in hours):
            raise ValueError("hours must be positive")
        if not targets <= hours:
            raise ValueError("target_periods must be a subset of hours")
        object.__setattr__(self, "hours", hours)
        object.__setattr__(self, "target_periods", targets)


@dataclass(frozen=True)
class SvdResult:
    """Singular value decomposition with eigenflows as left vectors."""

    singular_values: np.ndarray  # descending, >= 0
    left_vectors: np.ndarray  # t x p, orthonormal columns (eigenflows u_i)
    right_vectors: np.ndarray  # p x p, orthonormal columns (principal components v_i)

    @property
    def eigenvalues(self) -> np.ndarray:
        """lambda_i = sigma_i**2, the per-component energies."""
        return self.singular_values**2

    @property
    def n_components(self) -> int:
        return self.singular_values.shape[0]


@dataclass(frozen=True)
class EigenflowClassification:
    """Criterion membership flags and derived label for one eigenflow."""

    index: int  # 1-based, ordered by descending singular value
    satisfies_d: bool
    satisfies_s: bool
    satisfies_n: bool
    label: str

    def __post_init__(self):
        n_flags = int(self.satisfies_d) + int(self.satisfies_s) + int(self.satisfies_n)
        if n_flags >= 2:
            expected = LABEL_INDETERMINATE
        elif n_flags == 0:
            expected = LABEL_NON_DETERMINATE
        elif self.satisfies_d:
            expected = LABEL_D
        elif self.satisfies_s:
            expected = LABEL_S
        else:
            expected = LABEL_N
        if self.label != expected:
            raise ValueError(f"label {self.label!r} inconsistent with flags, expected {expected!r}")


def _classify_label(d: bool, s: bool, n: bool) -> str:
    n_flags = int(d) + int(s) + int(n)
    if n_flags >= 2:
        return LABEL_INDETERMINATE
    if n_flags == 0:
        return LABEL_NON_DETERMINATE
    return LABEL_D if d else (LABEL_S if s else LABEL_N)


def pca(x_centered: np.ndarray) -> SvdResult:
    """Thin SVD of a column-centered matrix with a fixed sign convention.

    Requires t >= p so that all p principal component vectors exist.  The
    sign of each right vector is chosen so its largest-magnitude entry is
    positive (first such entry on ties), which makes stored artifacts
    deterministic.
    """
    x = np.asarray(x_centered, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("matrix contains non-finite entries")
    t, p = x.shape
    if t < p:
        raise ValueError(f"need at least as many rows as columns, got {t}x{p}")
    col_scale = np.maximum(np.abs(x).max(axis=0), 1.0)
    if (np.abs(x.mean(axis=0)) > 1e-9 * col_scale).any():
        raise ValueError("columns are not centered; call center_columns first")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    v = vt.T
    for i in range(p):
        j = int(np.argmax(np.abs(v[:, i])))
        if v[j, i] < 0:
            v[:, i] = -v[:, i]
            u[:, i] = -u[:, i]
    return SvdResult(singular_values=s, left_vectors=u, right_vectors=v)


def fourier_power(u: np.ndarray, h: float, t0: float) -> float:
    """Single-frequency Fourier power of ``u`` at period ``h`` hours.

    Evaluates |sum_k u(k+1) exp(-i w k)|^2 / t with w = 2 pi / T and
    T = 60 h / t0, where t0 is the sampling interval in minutes.  This is
    a pointwise evaluation, not an FFT bin.
    """
    u = np.asarray(u, dtype=float)
    t = u.shape[0]
    if t < 2:
        raise ValueError("need at least two samples")
    if h <= 0 or t0 <= 0:
        raise ValueError("h and t0 must be positive")
    period_samples = 60.0 * h / t0
    omega = 2.0 * math.pi / period_samples
    phase = np.exp(-1j * omega * np.arange(t))
    return float(abs(phase @ u) ** 2 / t)


def _power_spectrum(u: np.ndarray, periods: PeriodSet, t0: float) -> tuple[list[float], np.ndarray]:
    hours = sorted(periods.hours)
    return hours, np.array([fourier_power(u, h, t0) for h in hours])


def classify_d(u: np.ndarray, periods: PeriodSet, t0: float) -> bool:
    """True when the power-maximizing periods intersect the targets.

    Powers within a 1e-12 relative band of the maximum count as ties.
    """
    hours, powers = _power_spectrum(u, periods, t0)
    p_max = powers.max()
    argmax = {hours[i] for i in range(len(hours)) if powers[i] >= p_max * (1.0 - ARGMAX_TIE_RTOL)}
    return bool(argmax & periods.target_periods)


def classify_s(u: np.ndarray) -> bool:
    """True when any entry lies outside mean +/- 5 sample standard deviations."""
    u = np.asarray(u, dtype=float)
    sd = u.std(ddof=1)
    if sd == 0:
        return False
    return bool((np.abs(u - u.mean()) > SPIKE_SIGMA_FACTOR * sd).any())


def critical_constant(alpha: float) -> float:
    """Asymptotic Kolmogorov-Smirnov critical constant c(alpha).

    From the Kolmogorov distribution tail, c(0.05) = 1.358.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


def classify_n(u: np.ndarray, alpha: float = 0.05, c_alpha: float | None = None) -> bool:
    """Kolmogorov-Smirnov normality check on the standardized series.

    The series is standardized by its sample mean and standard deviation,
    the one-sample K-S statistic D against the standard normal CDF is
    computed, and the criterion holds when D < c(alpha)/sqrt(t).
    """
    u = np.asarray(u, dtype=float)
    t = u.shape[0]
    sd = u.std(ddof=1)
    if sd == 0:
        raise ValueError("constant series has no normality statistic (sigma = 0)")
    z = (u - u.mean()) / sd
    d_stat = stats.kstest(z, "norm").statistic
    c = critical_constant(alpha) if c_alpha is None else c_alpha
    return bool(d_stat < c / math.sqrt(t))


def classify_all(
    svd: SvdResult,
    periods: PeriodSet | None = None,
    t0: float = 5.0,
    alpha: float = 0.05,
) -> list[EigenflowClassification]:
    """Classify every eigenflow of an SVD result.

    A constant eigenflow cannot be Gaussian; its normality flag is set
    to False with a warning instead of aborting.
    """
    periods = periods or PeriodSet()
    out = []
    for i in range(svd.n_components):
        u = svd.left_vectors[:, i]
        d_flag = classify_d(u, periods, t0)
        s_flag = classify_s(u)
        try:
            n_flag = classify_n(u, alpha)
        except ValueError:
            warnings.warn(f"eigenflow {i + 1} has zero variance; normality flag set to False")
            n_flag = False
        out.append(
            EigenflowClassification(
                index=i + 1,
                satisfies_d=d_flag,
                satisfies_s=s_flag,
                satisfies_n=n_flag,
                label=_classify_label(d_flag, s_flag, n_flag),
            )
        )
    return out


def unclassified_energy_rate(svd: SvdResult, classes: list[EigenflowClassification]) -> float:
    """Energy fraction carried by indeterminate plus non-determinate eigenflows."""
    lam = svd.eigenvalues
    if len(classes) != lam.shape[0]:
        raise ValueError(f"expected {lam.shape[0]} classifications, got {len(classes)}")
    total = lam.sum()
    if total == 0:
        raise ValueError("all eigenvalues are zero; energy rate undefined")
    ueid = [c.index - 1 for c in classes if c.label in (LABEL_INDETERMINATE, LABEL_NON_DETERMINATE)]
    return float(lam[ueid].sum() / total)


def rank_r_approximation(svd: SvdResult, r: int) -> np.ndarray:
    """Best rank-r approximation, the sum of the top r singular triplets."""
    p = svd.n_components
    if not 1 <= r <= p:
        raise ValueError(f"r must be in [1, {p}], got {r}")
    u = svd.left_vectors[:, :r]
    v = svd.right_vectors[:, :r]
    return (u * svd.singular_values[:r]) @ v.T


def classification_summary(
    svd: SvdResult, classes: list[EigenflowClassification]
) -> dict[str, float | int]:
    """Aggregate counts per criterion, plus the unclassified energy rate."""
    n_ind = sum(c.label == LABEL_INDETERMINATE for c in classes)
    n_non = sum(c.label == LABEL_NON_DETERMINATE for c in classes)
    return {
        "n_eigenflows": len(classes),
        "satisfy_d": sum(c.satisfies_d for c in classes),
        "satisfy_s": sum(c.satisfies_s for c in classes),
        "satisfy_n": sum(c.satisfies_n for c in classes),
        "non_determinate": n_non,
        "indeterminate": n_ind,
        "classified": len(classes) - n_ind - n_non,
        "unclassified_energy_rate": unclassified_energy_rate(svd, classes),
    }


def classification_report_dict(
    svd: SvdResult, classes: list[EigenflowClassification]
) -> dict:
    """JSON-ready report: one record per eigenflow plus summary counts."""
    records = [
        {
            "index": c.index,
            "satisfies_d": c.satisfies_d,
            "satisfies_s": c.satisfies_s,
            "satisfies_n": c.satisfies_n,
            "label": c.label,
            "sigma_value": float(svd.singular_values[c.index - 1]),
        }
        for c in classes
    ]
    return {"eigenflows": records, "summary": classification_summary(svd, classes)}
