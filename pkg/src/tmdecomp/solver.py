"""Relaxed principal component pursuit solved by accelerated proximal gradient.

The solver minimizes  mu*||A||_* + mu*lambda*||E||_1 + 1/2*||X - A - E||_F^2
on a column-rescaled copy of the traffic matrix, alternating momentum
extrapolation, a gradient step with fixed 1/2 step size (the smooth term
has Lipschitz constant 2), singular value thresholding for A and entrywise
soft thresholding for E.  Iterations stop when the squared Frobenius norm
of the stopping pair drops below the tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .matrix import Decomposition, TrafficMatrix, scale_columns
from .wavelet import WaveletConfig, column_sigmas

__all__ = [
    "ApgParams",
    "ApgState",
    "soft_threshold",
    "singular_value_threshold",
    "compute_lambda",
    "compute_mu",
    "apg_decompose",
]

DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_ITERATIONS = 5000


@dataclass(frozen=True)
class ApgParams:
    """Solver parameters: regularization, Lagrangian weight and stopping."""

    lam: float
    mu: float
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0 or self.tolerance <= 0:
            raise ValueError("lam, mu and tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class ApgState:
    """Current and previous iterates plus the momentum scalars."""

    A_k: np.ndarray
    A_prev: np.ndarray
    E_k: np.ndarray
    E_prev: np.ndarray
    t_k: float = 1.0
    t_prev: float = 1.0
    k: int = 0

    @staticmethod
    def initial(shape: tuple[int, int]) -> "ApgState":
        zeros = np.zeros(shape)
        return ApgState(A_k=zeros, A_prev=zeros, E_k=zeros, E_prev=zeros)

    @staticmethod
    def next_momentum(t_k: float) -> float:
        return (1.0 + math.sqrt(4.0 * t_k * t_k + 1.0)) / 2.0


def soft_threshold(m: np.ndarray, eps: float) -> np.ndarray:
    """Entrywise shrinkage: m - eps above eps, m + eps below -eps, else 0."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    m = np.asarray(m, dtype=float)
    return np.sign(m) * np.maximum(np.abs(m) - eps, 0.0)


def _svt(m: np.ndarray, eps: float) -> tuple[np.ndarray, int, float]:
    """SVD shrinkage returning (matrix, surviving count, nuclear norm of result)."""
    u, s, vt = np.linalg.svd(np.asarray(m, dtype=float), full_matrices=False)
    survivors = int((s > eps).sum())
    shrunk = s[:survivors] - eps
    return (u[:, :survivors] * shrunk) @ vt[:survivors], survivors, float(shrunk.sum())


def singular_value_threshold(m: np.ndarray, eps: float) -> tuple[np.ndarray, int]:
    """Soft-threshold the singular values of ``m`` by ``eps``.

    Returns the reconstructed matrix and the number of singular values
    that survive, which is the exact rank of the output.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    out, survivors, _ = _svt(m, eps)
    return out, survivors


def compute_lambda(t: int, p: int) -> float:
    """Sparsity regularization weight 1/sqrt(max(t, p))."""
    if t < 1 or p < 1:
        raise ValueError("t and p must be at least 1")
    return 1.0 / math.sqrt(max(t, p))


def compute_mu(t: int, p: int, sigma: float = 1.0) -> float:
    """Lagrangian weight sigma * sqrt(2 ln(t p) max(t, p)).

    The logarithm is natural, matching the basis pursuit denoising
    threshold sigma*sqrt(2 log n) this choice is derived from.
    """
    if t * p < 2:
        raise ValueError("t*p must be at least 2")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return sigma * math.sqrt(2.0 * math.log(t * p) * max(t, p))


def apg_decompose(
    matrix: TrafficMatrix,
    params: ApgParams | None = None,
    cfg: WaveletConfig | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> Decomposition:
    """Decompose a traffic matrix into deterministic, anomaly and noise parts.

    Per-column noise scales sigma_j are estimated from finest-scale wavelet
    detail; the matrix is divided by diag(sigma_j), iterated to convergence,
    and A, E are scaled back.  N is the exact remainder X - A - E.  When the
    iteration cap is hit, the last iterate is returned with ``converged``
    False rather than raising, so operators still get the partial result.

    Raises when any column has a zero noise-scale estimate (constant
    columns must be filtered by the caller).
    """
    x = matrix.values
    t, p = x.shape
    if params is None:
        params = ApgParams(
            lam=compute_lambda(t, p),
            mu=compute_mu(t, p, sigma=1.0),
            tolerance=tolerance,
            max_iterations=max_iterations,
        )
    sigmas = column_sigmas(x, cfg)
    if (sigmas <= 0).any():
        bad = np.flatnonzero(sigmas <= 0).tolist()
        raise ValueError(f"zero noise scale for columns {bad}; filter constant columns first")

    started = time.perf_counter()
    x_scaled = scale_columns(x, sigmas, "divide")
    state = ApgState.initial((t, p))
    svt_eps = params.mu / 2.0
    soft_eps = params.lam * params.mu / 2.0
    trace: list[float] = []
    rank_a = 0
    converged = False

    while True:
        beta = (state.t_prev - 1.0) / state.t_k
        y_a = state.A_k + beta * (state.A_k - state.A_prev)
        y_e = state.E_k + beta * (state.E_k - state.E_prev)
        half_residual = 0.5 * (y_a + y_e - x_scaled)
        g_a = y_a - half_residual
        g_e = y_e - half_residual
        a_next, rank_a, nuclear = _svt(g_a, svt_eps)
        e_next = soft_threshold(g_e, soft_eps)

        # stopping pair as written in the iteration scheme, using the
        # previous iterate A_k / E_k in the momentum term
        common = a_next + e_next - y_a - y_e
        s_a = 2.0 * (y_a - state.A_k) + common
        s_e = 2.0 * (y_e - state.E_k) + common
        stop_quantity = float((s_a**2).sum() + (s_e**2).sum())

        state = ApgState(
            A_k=a_next,
            A_prev=state.A_k,
            E_k=e_next,
            E_prev=state.E_k,
            t_k=ApgState.next_momentum(state.t_k),
            t_prev=state.t_k,
            k=state.k + 1,
        )
        fit = x_scaled - a_next - e_next
        trace.append(
            params.mu * nuclear
            + params.mu * params.lam * float(np.abs(e_next).sum())
            + 0.5 * float((fit**2).sum())
        )
        if stop_quantity < params.tolerance:
            converged = True
            break
        if state.k >= params.max_iterations:
            break

    a_out = scale_columns(state.A_k, sigmas, "multiply")
    e_out = scale_columns(state.E_k, sigmas, "multiply")
    n_out = x - a_out - e_out
    return Decomposition(
        A=a_out,
        E=e_out,
        N=n_out,
        lam=params.lam,
        mu=params.mu,
        sigmas=sigmas,
        iterations=state.k,
        objective_trace=trace,
        elapsed_seconds=time.perf_counter() - started,
        converged=converged,
        rank_A=rank_a,
    )
