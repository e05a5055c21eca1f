"""Traffic matrix data model and shared preprocessing operations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TrafficMatrix",
    "Decomposition",
    "center_columns",
    "preprocess_filter",
    "scale_columns",
]

DEFAULT_LABEL_DELIMITER = "→"  # "->" arrow used in OD labels, "SRC→DST"


@dataclass(frozen=True)
class TrafficMatrix:
    """A t x p matrix of per-interval, per-OD-flow byte counts.

    Columns are OD-flow time series, rows are per-interval snapshots.
    Entries must be finite and nonnegative; ``interval_minutes`` is the
    sampling interval length.
    """

    values: np.ndarray
    interval_minutes: float
    od_labels: list[str]
    origin_label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"traffic matrix must be 2-D, got shape {values.shape}")
        t, p = values.shape
        if t < 2 or p < 1:
            raise ValueError(f"need at least 2 rows and 1 column, got {t}x{p}")
        if not np.isfinite(values).all():
            raise ValueError("traffic matrix contains non-finite entries")
        if (values < 0).any():
            raise ValueError("traffic matrix contains negative entries")
        if self.interval_minutes <= 0:
            raise ValueError(f"interval_minutes must be positive, got {self.interval_minutes}")
        if len(self.od_labels) != p:
            raise ValueError(f"expected {p} OD labels, got {len(self.od_labels)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "od_labels", list(self.od_labels))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_intervals(self) -> int:
        return self.values.shape[0]

    @property
    def n_flows(self) -> int:
        return self.values.shape[1]


@dataclass
class Decomposition:
    """The triple X = A + E + N plus solver metadata.

    A is the deterministic (low-rank) part, E the anomaly (sparse) part
    and N the noise residual, defined as X - A - E.  ``rank_A`` is the
    exact number of singular values surviving the final shrinkage step.
    """

    A: np.ndarray
    E: np.ndarray
    N: np.ndarray
    lam: float
    mu: float
    sigmas: np.ndarray
    iterations: int
    objective_trace: list[float] = field(default_factory=list)
    elapsed_seconds: float = 0.0
    converged: bool = True
    rank_A: int = 0

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0:
            raise ValueError("lambda and mu must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.iterations != len(self.objective_trace):
            raise ValueError("iterations must equal the objective trace length")

    @property
    def l0_E(self) -> int:
        """Number of exactly nonzero anomaly entries."""
        return int(np.count_nonzero(self.E))


def center_columns(values: np.ndarray) -> np.ndarray:
    """Subtract the per-column mean so every column has zero mean."""
    values = np.asarray(values, dtype=float)
    return values - values.mean(axis=0, keepdims=True)


def preprocess_filter(
    matrix: TrafficMatrix,
    zero_fraction_limit: float = 0.5,
    excluded_pop: str | None = None,
    label_delimiter: str = DEFAULT_LABEL_DELIMITER,
) -> TrafficMatrix:
    """Drop unstable OD flows from a traffic matrix.

    A column is removed when its fraction of zero entries exceeds
    ``zero_fraction_limit`` or, if ``excluded_pop`` is given, when that
    PoP appears as source or destination of the OD label (labels split
    on ``label_delimiter``).  Column order is preserved.  Raises when
    every column would be removed.
    """
    if not 0.0 <= zero_fraction_limit <= 1.0:
        raise ValueError(f"zero_fraction_limit must be in [0, 1], got {zero_fraction_limit}")
    values = matrix.values
    t = values.shape[0]
    zero_frac = (values == 0).sum(axis=0) / t
    keep = zero_frac <= zero_fraction_limit
    if excluded_pop is not None:
        for j, label in enumerate(matrix.od_labels):
            if excluded_pop in label.split(label_delimiter):
                keep[j] = False
    if not keep.any():
        raise ValueError("preprocess_filter would remove every column")
    kept = np.flatnonzero(keep)
    return TrafficMatrix(
        values=values[:, kept],
        interval_minutes=matrix.interval_minutes,
        od_labels=[matrix.od_labels[j] for j in kept],
        origin_label=matrix.origin_label,
    )


def scale_columns(values: np.ndarray, sigmas: np.ndarray, direction: str) -> np.ndarray:
    """Divide or multiply each column j by sigmas[j].

    ``direction`` is "divide" or "multiply"; dividing then multiplying
    with the same sigmas is the identity up to roundoff.
    """
    values = np.asarray(values, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.ndim != 1 or sigmas.shape[0] != values.shape[1]:
        raise ValueError(f"need one sigma per column, got {sigmas.shape} for {values.shape}")
    if (sigmas <= 0).any():
        bad = np.flatnonzero(sigmas <= 0)
        raise ValueError(f"sigmas must be positive, offending columns: {bad.tolist()}")
    if direction == "divide":
        return values / sigmas
    if direction == "multiply":
        return values * sigmas
    raise ValueError(f"direction must be 'divide' or 'multiply', got {direction!r}")
