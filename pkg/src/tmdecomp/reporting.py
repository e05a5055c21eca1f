"""Summary metrics for decompositions and plot-ready TSV emitters."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix import Decomposition, TrafficMatrix

__all__ = [
    "DecompositionReport",
    "NoiseCorrelationReport",
    "decomposition_report",
    "noise_correlation",
    "numerical_rank",
    "write_two_column_tsv",
    "report_to_tsv_lines",
]

DEFAULT_NOISE_BOUNDS = (4.0, 0.6, 4.0, 0.9)


@dataclass(frozen=True)
class DecompositionReport:
    """Rank, sparsity and noise-energy metrics for one decomposition."""

    name: str
    rank_A: int
    rank_X: int
    rank_ratio: float
    l0_E: int
    cells: int
    sparsity_ratio: float
    noise_energy_ratio: float
    iterations: int
    elapsed_seconds: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rank_A": self.rank_A,
            "rank_X": self.rank_X,
            "rank_ratio": self.rank_ratio,
            "l0_E": self.l0_E,
            "cells": self.cells,
            "sparsity_ratio": self.sparsity_ratio,
            "noise_energy_ratio": self.noise_energy_ratio,
            "iterations": self.iterations,
            "elapsed_seconds": self.elapsed_seconds,
        }

    @staticmethod
    def from_dict(data: dict) -> "DecompositionReport":
        return DecompositionReport(**data)


@dataclass(frozen=True)
class NoiseCorrelationReport:
    """Per-flow (mean volume, noise std) scatter against power-law bounds.

    ``fraction_within_bounds`` and ``log_log_correlation`` are computed over
    flows with positive mean and positive noise std; both are None when no
    such flow exists.  ``excluded_columns`` counts the flows left out.
    """

    points: tuple[tuple[float, float], ...]
    bounds: tuple[float, float, float, float]
    fraction_within_bounds: float | None
    log_log_correlation: float | None
    excluded_columns: int

    def to_dict(self) -> dict:
        return {
            "points": [list(pt) for pt in self.points],
            "bounds": list(self.bounds),
            "fraction_within_bounds": self.fraction_within_bounds,
            "log_log_correlation": self.log_log_correlation,
            "excluded_columns": self.excluded_columns,
        }

    @staticmethod
    def from_dict(data: dict) -> "NoiseCorrelationReport":
        return NoiseCorrelationReport(
            points=tuple((float(m), float(s)) for m, s in data["points"]),
            bounds=tuple(data["bounds"]),
            fraction_within_bounds=data["fraction_within_bounds"],
            log_log_correlation=data["log_log_correlation"],
            excluded_columns=data["excluded_columns"],
        )


def numerical_rank(values: np.ndarray, tolerance: float | None = None) -> int:
    """Numerical rank with the machine-eps-scaled threshold max(t,p)*eps*sigma_max."""
    values = np.asarray(values, dtype=float)
    if tolerance is None:
        return int(np.linalg.matrix_rank(values))
    return int(np.linalg.matrix_rank(values, tol=tolerance))


def decomposition_report(
    matrix: TrafficMatrix,
    decomposition: Decomposition,
    name: str = "",
    rank_tolerance: float | None = None,
) -> DecompositionReport:
    """Summarize one decomposition.

    ``l0_E`` counts exactly nonzero anomaly entries (the solver's soft
    thresholding produces exact zeros); rank_A is the solver's surviving
    singular value count; rank_X is the numerical rank of the input.
    """
    x = matrix.values
    t, p = x.shape
    rank_x = numerical_rank(x, rank_tolerance)
    l0_e = decomposition.l0_E
    x_norm = float(np.linalg.norm(x))
    n_norm = float(np.linalg.norm(decomposition.N))
    return DecompositionReport(
        name=name or matrix.origin_label,
        rank_A=decomposition.rank_A,
        rank_X=rank_x,
        rank_ratio=decomposition.rank_A / rank_x if rank_x else 0.0,
        l0_E=l0_e,
        cells=t * p,
        sparsity_ratio=l0_e / (t * p),
        noise_energy_ratio=n_norm / x_norm if x_norm else 0.0,
        iterations=decomposition.iterations,
        elapsed_seconds=decomposition.elapsed_seconds,
    )


def noise_correlation(
    matrix: TrafficMatrix,
    decomposition: Decomposition,
    bounds: tuple[float, float, float, float] = DEFAULT_NOISE_BOUNDS,
) -> NoiseCorrelationReport:
    """Relate per-flow noise spread to mean volume.

    Emits one (mean(X_j), std(N_j)) point per flow, the share of usable
    points inside b1*m^c1 <= std <= b2*m^c2, and the Pearson correlation
    of (log mean, log std).
    """
    b1, c1, b2, c2 = bounds
    means = matrix.values.mean(axis=0)
    stds = decomposition.N.std(axis=0, ddof=1)
    points = tuple((float(m), float(s)) for m, s in zip(means, stds))
    usable = (means > 0) & (stds > 0)
    excluded = int((~usable).sum())
    if not usable.any():
        return NoiseCorrelationReport(points, tuple(bounds), None, None, excluded)
    m_ok = means[usable]
    s_ok = stds[usable]
    within = (b1 * m_ok**c1 <= s_ok) & (s_ok <= b2 * m_ok**c2)
    fraction = float(within.mean())
    log_m = np.log(m_ok)
    log_s = np.log(s_ok)
    if len(m_ok) < 2 or log_m.std() == 0 or log_s.std() == 0:
        correlation = None
    else:
        correlation = float(np.corrcoef(log_m, log_s)[0, 1])
        if math.isnan(correlation):
            correlation = None
    return NoiseCorrelationReport(points, tuple(bounds), fraction, correlation, excluded)


def write_two_column_tsv(path, header: tuple[str, str], rows) -> None:
    """Write one plot-ready series as a two-column TSV file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{header[0]}\t{header[1]}\n")
        for a, b in rows:
            fh.write(f"{_fmt(a)}\t{_fmt(b)}\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_to_tsv_lines(report: DecompositionReport) -> list[str]:
    """Key/value TSV lines for a decomposition report."""
    return [f"{key}\t{_fmt(value)}" for key, value in report.to_dict().items()]
