"""Gossip-type randomized PageRank.

At step ``k`` a page ``i = theta(k)`` pushes its whole value along its own
column of ``A`` while every other page keeps its value. With the link
matrix ``A_i`` built that way the update is

    x(k+1) = (1 - mh) A_i x(k) + mh * w,

with ``w`` the teleportation vector (uniform ``1/n`` for plain PageRank).
The iterates keep oscillating; the time average ``y(k)`` converges to the
PageRank vector in mean square.

Randomness
----------
Every trial owns a ``numpy.random.Generator`` on the PCG64 bit generator.
In ``single_uniform`` mode the trial seed feeds PCG64 directly and
``theta(k)`` is drawn with ``Generator.integers`` in fixed chunks of
:data:`CHUNK` steps. In ``simultaneous`` mode
``SeedSequence(seed).spawn(n)`` gives each page its own stream, and page
``j`` fires at step ``k`` when its ``k``-th ``Generator.random`` draw is
below ``p``. Trials never share state, so batching trials together (as
:func:`gossip_trials` does) gives the same trace bit for bit as running
each alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import ValidationError
from .graph import STOCHASTIC, SparseColumnMatrix
from .pagerank import check_damping, check_rank_vector, pagerank_power

SINGLE_UNIFORM = "single_uniform"
SIMULTANEOUS = "simultaneous"
CHUNK = 4096


def m_hat(m: float, n: int) -> float:
    """``2m / (n - m(n - 2))``, the damping paired with the averaged matrix
    ``(2/n) A + ((n-2)/n) I``. Equals ``0.3 / (0.85 n + 0.3)`` at ``m = 0.15``.
    """
    check_damping(m)
    if n < 2:
        raise ValidationError("n must be at least 2")
    return 2.0 * m / (n - m * (n - 2))


def gossip_damping(m: float, n: int, p: Optional[float] = None) -> float:
    """Damping that makes the mean gossip map fix the PageRank vector.

    With column-push link matrices the expected link matrix is
    ``q A + (1 - q) I`` where ``q`` is the chance a given page fires in one
    step (``1/n`` for a single uniform pick, ``p`` in simultaneous mode).
    Solving for the fixed point gives ``q m / (1 - m + q m)``; for the single
    uniform scheme this is ``m / (n - m(n - 1))``.
    """
    check_damping(m)
    q = 1.0 / n if p is None else p
    return q * m / (1.0 - m + q * m)


@dataclass(frozen=True)
class DistributedLinkMatrix:
    """``A_i``: column ``page`` of ``A``, identity in every other column.

    Only column ``page`` is stored (``rows``, ``values``).
    """

    page: int
    rows: np.ndarray
    values: np.ndarray
    n: int

    @property
    def nnz(self) -> int:
        return self.rows.size + self.n - 1

    def toarray(self) -> np.ndarray:
        out = np.eye(self.n)
        out[:, self.page] = 0.0
        out[self.rows, self.page] = self.values
        return out

    def __matmul__(self, x):
        x = np.asarray(x, dtype=float)
        out = x.copy()
        xi = x[self.page]
        out[self.page] = 0.0
        out[self.rows] += self.values * xi
        return out


def distributed_link_matrix(A: SparseColumnMatrix, i: int) -> DistributedLinkMatrix:
    if not 0 <= i < A.n:
        raise ValidationError(f"page {i} out of range for n={A.n}")
    rows, vals = A.column(i)
    return DistributedLinkMatrix(int(i), np.array(rows), np.array(vals), A.n)


def apply_distributed(A: SparseColumnMatrix, i: int, m_hat: float, x) -> np.ndarray:
    """One gossip step ``(1 - mh) A_i x + (mh / n) 1``."""
    if not A.is_stochastic:
        raise ValidationError("apply_distributed needs a column-stochastic matrix")
    x = check_rank_vector(x, A.n)
    return (1.0 - m_hat) * (distributed_link_matrix(A, i) @ x) + m_hat / A.n


def average_link_matrix(A: SparseColumnMatrix) -> SparseColumnMatrix:
    """Expected link matrix under a uniform pick: ``(1/n) sum_i A_i``.

    For the column-push matrices this is ``(1/n) A + ((n-1)/n) I``.
    """
    n = A.n
    avg = A.matrix / n + sp.identity(n, format="csc") * ((n - 1) / n)
    return SparseColumnMatrix(sp.csc_matrix(avg), STOCHASTIC)


@dataclass
class GossipTrace:
    """Checkpointed record of one gossip trial.

    ``steps[c]`` is the step index of checkpoint ``c``; ``states`` and
    ``averages`` hold ``x`` and ``y`` there. ``l1_error`` and ``sq_error``
    (``||y - x*||_1`` and ``||y - x*||_2^2``) are None without a reference.
    """

    seed: int
    mode: str
    damping: float
    steps: np.ndarray
    states: np.ndarray
    averages: np.ndarray
    l1_error: Optional[np.ndarray] = None
    sq_error: Optional[np.ndarray] = None

    @property
    def mse_history(self):
        return self.sq_error


def _checkpoints(steps: int, every: int) -> np.ndarray:
    if every < 1:
        raise ValidationError("checkpoint_every must be at least 1")
    ks = np.arange(0, steps + 1, every)
    if ks[-1] != steps:
        ks = np.append(ks, steps)
    return ks


class _SingleDraws:
    def __init__(self, seeds, n):
        self._rngs = [np.random.Generator(np.random.PCG64(s)) for s in seeds]
        self._n = n

    def next_chunk(self):
        return np.stack([rng.integers(0, self._n, size=CHUNK) for rng in self._rngs])


class _SimultaneousDraws:
    def __init__(self, seeds, n, p):
        self._streams = [
            [np.random.Generator(np.random.PCG64(ss)) for ss in np.random.SeedSequence(s).spawn(n)]
            for s in seeds
        ]
        self._p = p

    def next_chunk(self):
        # shape (trials, CHUNK, n)
        return np.stack(
            [np.stack([g.random(CHUNK) < self._p for g in streams], axis=1) for streams in self._streams]
        )


def _simulate(matrix, damping, teleport, x0, seeds, steps, mode, p, checkpoint_every):
    """Run all trials in lockstep; returns per-trial checkpoint arrays."""
    n = matrix.shape[0]
    T = len(seeds)
    ks = _checkpoints(steps, checkpoint_every)
    states = np.empty((T, ks.size, n))
    averages = np.empty((T, ks.size, n))

    X = np.zeros((T, n + 1))  # trailing column absorbs padded scatter writes
    X[:, :n] = x0
    Y = X[:, :n].copy()
    states[:, 0] = X[:, :n]
    averages[:, 0] = Y
    keep = 1.0 - damping
    shift = damping * np.asarray(teleport, dtype=float)
    tr = np.arange(T)

    if mode == SINGLE_UNIFORM:
        draws = _SingleDraws(seeds, n)
        counts = np.diff(matrix.indptr)
        width = max(int(counts.max()), 1)
        rows_pad = np.full((n, width), n, dtype=np.int64)
        vals_pad = np.zeros((n, width))
        for j in range(n):
            lo, hi = matrix.indptr[j], matrix.indptr[j + 1]
            rows_pad[j, : hi - lo] = matrix.indices[lo:hi]
            vals_pad[j, : hi - lo] = matrix.data[lo:hi]
    elif mode == SIMULTANEOUS:
        draws = _SimultaneousDraws(seeds, n, p)
    else:
        raise ValidationError(f"unknown gossip mode {mode!r}")

    c = 1
    chunk = None
    for k in range(steps):
        pos = k % CHUNK
        if pos == 0:
            chunk = draws.next_chunk()
        if mode == SINGLE_UNIFORM:
            th = chunk[:, pos]
            xi = X[tr, th]
            X[tr, th] = 0.0
            X[tr[:, None], rows_pad[th]] += vals_pad[th] * xi[:, None]
        else:
            fired = chunk[:, pos, :]
            pushed = X[:, :n] * fired
            X[:, :n] += (matrix @ pushed.T).T - pushed
        X *= keep
        X[:, :n] += shift
        Y += (X[:, :n] - Y) / (k + 2)
        if c < ks.size and ks[c] == k + 1:
            states[:, c] = X[:, :n]
            averages[:, c] = Y
            c += 1
    return ks, states, averages


def _validate_mode(mode, p):
    if mode == SIMULTANEOUS:
        if p is None or not 0.0 < p <= 1.0:
            raise ValidationError(f"simultaneous mode needs p in (0, 1], got {p}")
    elif mode != SINGLE_UNIFORM:
        raise ValidationError(f"unknown gossip mode {mode!r}")


def _run_on_matrix(matrix, m, seeds, steps, mode, p, checkpoint_every, x_star, x0,
                   damping, teleport):
    n = matrix.shape[0]
    _validate_mode(mode, p)
    if steps < 0:
        raise ValidationError("steps must be nonnegative")
    if damping is None:
        damping = gossip_damping(m, n, p if mode == SIMULTANEOUS else None)
    if not 0.0 < damping < 1.0:
        raise ValidationError(f"gossip damping must lie in (0, 1), got {damping}")
    teleport = np.full(n, 1.0 / n) if teleport is None else np.asarray(teleport, dtype=float)
    x0 = np.full(n, 1.0 / n) if x0 is None else check_rank_vector(x0, n)
    ks, states, averages = _simulate(
        matrix, damping, teleport, x0, list(seeds), steps, mode, p, checkpoint_every
    )
    traces = []
    for t, seed in enumerate(seeds):
        trace = GossipTrace(int(seed), mode, float(damping), ks, states[t], averages[t])
        if x_star is not None:
            diff = averages[t] - np.asarray(x_star)[None, :]
            trace.l1_error = np.abs(diff).sum(axis=1)
            trace.sq_error = (diff * diff).sum(axis=1)
        traces.append(trace)
    return traces


def gossip_trials(
    A: SparseColumnMatrix,
    m: float,
    seeds: Sequence[int],
    steps: int,
    mode: str = SINGLE_UNIFORM,
    p: Optional[float] = None,
    checkpoint_every: int = 100,
    x_star=None,
    x0=None,
    damping: Optional[float] = None,
):
    """Independent gossip trials, one per seed, simulated in lockstep."""
    if not A.is_stochastic:
        raise ValidationError("gossip needs a column-stochastic matrix")
    check_damping(m)
    return _run_on_matrix(
        A.matrix, m, seeds, steps, mode, p, checkpoint_every, x_star, x0, damping, None
    )


def gossip_run(
    A: SparseColumnMatrix,
    m: float,
    seed: int,
    steps: int,
    mode: str = SINGLE_UNIFORM,
    p: Optional[float] = None,
    checkpoint_every: int = 100,
    x_star=None,
    x0=None,
    damping: Optional[float] = None,
) -> GossipTrace:
    """Simulate one gossip trial.

    Parameters
    ----------
    A : SparseColumnMatrix
        Column-stochastic hyperlink matrix.
    m : float
        Teleportation probability of the target PageRank.
    seed : int
    steps : int
        Number of updates; 0 returns the initial state only.
    mode : {"single_uniform", "simultaneous"}
        One uniformly drawn page per step, or every page independently with
        probability ``p``.
    checkpoint_every : int
        Snapshot spacing; step 0 and the final step are always recorded.
    x_star : array_like, optional
        Reference PageRank for the error histories.
    x0 : array_like, optional
        Stochastic start, uniform by default.
    damping : float, optional
        Override for :func:`gossip_damping`.
    """
    return gossip_trials(A, m, [seed], steps, mode, p, checkpoint_every, x_star, x0, damping)[0]


@dataclass
class MSEEstimate:
    """Per-checkpoint statistics of ``||y(k) - x*||`` over independent trials."""

    steps: np.ndarray
    mean: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    l1_mean: np.ndarray
    l1_minimum: np.ndarray
    l1_maximum: np.ndarray


def summarize_traces(traces) -> MSEEstimate:
    sq = np.stack([t.sq_error for t in traces])
    l1 = np.stack([t.l1_error for t in traces])
    return MSEEstimate(
        traces[0].steps, sq.mean(axis=0), sq.min(axis=0), sq.max(axis=0),
        l1.mean(axis=0), l1.min(axis=0), l1.max(axis=0),
    )


def mse_estimate(
    A: SparseColumnMatrix,
    m: float,
    trials: int,
    steps: int,
    seeds: Optional[Sequence[int]] = None,
    x_star=None,
    mode: str = SINGLE_UNIFORM,
    p: Optional[float] = None,
    checkpoint_every: int = 100,
    x0=None,
) -> MSEEstimate:
    """Monte Carlo estimate of ``E ||y(k) - x*||^2`` at each checkpoint."""
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    seeds = list(range(trials)) if seeds is None else list(seeds)
    if len(seeds) != trials:
        raise ValidationError("need exactly one seed per trial")
    if x_star is None:
        x_star, _ = pagerank_power(A, m, tol=1e-14, max_iter=10000)
    traces = gossip_trials(A, m, seeds, steps, mode, p, checkpoint_every, x_star, x0)
    return summarize_traces(traces)
