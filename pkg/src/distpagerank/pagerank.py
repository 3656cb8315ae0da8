"""Centralized PageRank: the teleportation model and the power method.

The damped matrix ``M = (1 - m) A + (m / n) 1 1^T`` is never formed; every
product is computed as a sparse ``A @ x`` plus a constant shift. The sparse
product is scipy's sequential CSC kernel, which accumulates column by column
in index order, so results are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .graph import SparseColumnMatrix

DEFAULT_DAMPING = 0.15
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    converged: bool = False


def check_damping(m: float) -> None:
    if not 0.0 < m < 1.0:
        raise ValidationError(f"damping must lie in (0, 1), got {m}")


def check_rank_vector(x, n: int, atol: float = 1e-10) -> np.ndarray:
    """Validate a stochastic vector of length ``n`` and return it as floats."""
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValidationError(f"expected a vector of length {n}, got shape {x.shape}")
    if np.any(x < 0):
        raise ValidationError("rank vector has negative entries")
    if abs(x.sum() - 1.0) > atol:
        raise ValidationError(f"rank vector sums to {x.sum()!r}, not 1")
    return x


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def _renormalize(x: np.ndarray) -> np.ndarray:
    s = x.sum()
    if abs(s - 1.0) > 1e-12:
        x = x / s
    return x


def teleport_apply(A: SparseColumnMatrix, m: float, x) -> np.ndarray:
    """Return ``M x = (1 - m) A x + (m / n) 1`` for a stochastic ``x``."""
    check_damping(m)
    if not A.is_stochastic:
        raise ValidationError("teleport_apply needs a column-stochastic matrix")
    x = check_rank_vector(x, A.n)
    return _renormalize((1.0 - m) * (A @ x) + m / A.n)


def teleportation_matrix(A: SparseColumnMatrix, m: float) -> np.ndarray:
    """Dense ``M``; only meant for small examples and cross-checks."""
    check_damping(m)
    return (1.0 - m) * A.toarray() + m / A.n


def damped_power(apply, source, x0, m, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Iterate ``x <- (1 - m) apply(x) + source`` until the 1-norm step < ``tol``.

    ``source`` must sum to ``m`` so that stochastic iterates stay stochastic.
    Shared by plain PageRank, the aggregated step-1 system and Eigenfactor.
    """
    x = np.array(x0, dtype=float)
    report = SolveReport()
    for _ in range(max_iter):
        x_next = _renormalize((1.0 - m) * apply(x) + source)
        step = float(np.abs(x_next - x).sum())
        x = x_next
        report.iterations += 1
        report.residual_history.append(step)
        if step < tol:
            report.converged = True
            break
    return x, report


def pagerank_power(
    A: SparseColumnMatrix,
    m: float = DEFAULT_DAMPING,
    x0=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
):
    """PageRank by the power method.

    Parameters
    ----------
    A : SparseColumnMatrix
        Column-stochastic hyperlink matrix.
    m : float
        Teleportation probability in (0, 1).
    x0 : array_like, optional
        Stochastic starting vector; uniform by default.
    tol : float
        Stop once ``||x(k+1) - x(k)||_1 < tol``.
    max_iter : int
        Iteration cap. Hitting it is not an error; ``report.converged`` is False.

    Returns
    -------
    x : ndarray
        The last iterate, a stochastic vector.
    report : SolveReport
    """
    check_damping(m)
    if not A.is_stochastic:
        raise ValidationError("pagerank_power needs a column-stochastic matrix; repair first")
    x0 = uniform(A.n) if x0 is None else check_rank_vector(x0, A.n)
    return damped_power(A.matrix.__matmul__, np.full(A.n, m / A.n), x0, m, tol, max_iter)


def contraction_check(A: SparseColumnMatrix, m: float, x, x_star) -> float:
    """Return ``||M x - x*||_1 / ||x - x*||_1`` (0 when ``x == x*``).

    Evaluated as ``||M d||_1 / ||d||_1`` with ``d = x - x*`` projected onto
    zero-sum vectors, which is exact in real arithmetic because ``M x* = x*``
    and both vectors sum to one. Working on the difference keeps the ratio
    free of the error in ``x*`` itself, so it can be checked against
    ``1 - m`` far below the accuracy of ``x*``.
    """
    check_damping(m)
    d = np.asarray(x, dtype=float) - np.asarray(x_star, dtype=float)
    d = d - d.mean()
    denom = np.abs(d).sum()
    if denom == 0.0:
        return 0.0
    return float(np.abs((1.0 - m) * (A @ d)).sum() / denom)


def sensitivity_to_m(A: SparseColumnMatrix, m: float, h: float = 1e-3, tol: float = 1e-14,
                     max_iter: int = 20000):
    """Central difference ``(x*(m + h) - x*(m - h)) / (2 h)``.

    Returns the derivative estimate and the two inner solve reports.
    """
    if not (0.0 < m - h and m + h < 1.0):
        raise ValidationError("m - h and m + h must both lie in (0, 1)")
    hi, rep_hi = pagerank_power(A, m + h, tol=tol, max_iter=max_iter)
    lo, rep_lo = pagerank_power(A, m - h, tol=tol, max_iter=max_iter)
    return (hi - lo) / (2.0 * h), (rep_hi, rep_lo)
