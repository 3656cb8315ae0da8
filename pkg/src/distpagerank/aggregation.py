"""Aggregation-based approximate PageRank.

Pages are partitioned into groups. The coordinate change ``V`` maps a page
vector to its group totals (first ``r`` coordinates) and, for every group of
size ``k > 1``, the deviations of its first ``k - 1`` members from the group
mean. In those coordinates the PageRank equation is

    [x1; x2] = (1 - m) [[A11, A12], [A21, A22]] [x1; x2] + (m / n) [u; 0].

Dropping ``A12`` and replacing ``A22`` by the block-diagonal matrix that the
internal links alone would produce gives a triangular system that is solved
group-by-group (:func:`approximate_pagerank`).

Groups are numbered in order of first appearance when scanning pages
``0..n-1``, and members are listed in increasing page order. Within each
group the last member is the one eliminated by ``V``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .distributed import SINGLE_UNIFORM, _run_on_matrix, gossip_damping
from .exceptions import ParseError, SingularBlockError, ValidationError
from .graph import SparseColumnMatrix, WebGraph, find_dangling
from .pagerank import SolveReport, check_damping, damped_power


@dataclass(frozen=True)
class Grouping:
    """Partition of ``n`` pages into ``r`` groups (``assignment[p]`` is a group id)."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise ValidationError("assignment must be a nonempty 1-D array")
        # renumber by first appearance
        _, first, inverse = np.unique(a, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        a = rank[inverse.ravel()]
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    @classmethod
    def from_groups(cls, groups, n: int) -> "Grouping":
        """Build from a list of page collections covering ``0..n-1`` exactly once."""
        a = -np.ones(n, dtype=np.int64)
        for g, pages in enumerate(groups):
            for p in pages:
                if a[p] >= 0:
                    raise ValidationError(f"page {p} is in more than one group")
                a[p] = g
        if np.any(a < 0):
            raise ValidationError(f"pages {np.flatnonzero(a < 0)[:10].tolist()} have no group")
        return cls(a)

    @classmethod
    def singletons(cls, n: int) -> "Grouping":
        return cls(np.arange(n))

    @classmethod
    def whole(cls, n: int) -> "Grouping":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.assignment.size

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment)

    @property
    def r(self) -> int:
        return self.sizes.size

    @cached_property
    def singles(self) -> frozenset:
        return frozenset(int(g) for g in np.flatnonzero(self.sizes == 1))

    @property
    def r1(self) -> int:
        return len(self.singles)

    @cached_property
    def order(self) -> np.ndarray:
        """Pages sorted so that each group's members are contiguous."""
        return np.argsort(self.assignment, kind="stable")

    @cached_property
    def members(self) -> list:
        bounds = np.concatenate([[0], np.cumsum(self.sizes)])
        return [self.order[bounds[g]:bounds[g + 1]] for g in range(self.r)]

    def is_single_page(self, p: int) -> bool:
        return self.sizes[self.assignment[p]] == 1


def read_grouping(path, n: int, one_based: bool = True) -> Grouping:
    """Read lines ``page_index group_label``; every page must appear once."""
    offset = 1 if one_based else 0
    labels = [None] * n
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected 'page group', got {line!r}", lineno)
            try:
                page = int(parts[0]) - offset
            except ValueError:
                raise ParseError(f"bad page index {parts[0]!r}", lineno) from None
            if not 0 <= page < n:
                raise ValidationError(f"line {lineno}: page {parts[0]} out of range")
            if labels[page] is not None:
                raise ValidationError(f"line {lineno}: page {parts[0]} assigned twice")
            labels[page] = parts[1]
    missing = [i + offset for i, lab in enumerate(labels) if lab is None]
    if missing:
        raise ValidationError(f"pages {missing[:10]} have no group")
    _, ids = np.unique(np.array(labels, dtype=object).astype(str), return_inverse=True)
    return Grouping(ids)


def label_prefix(label: str) -> str:
    """Host part of a page label: scheme dropped, cut at the first ``/``."""
    s = label.strip()
    if "://" in s:
        s = s.split("://", 1)[1]
    return s.split("/", 1)[0].lower()


def group_by_label_prefix(g: WebGraph) -> Grouping:
    if g.labels is None:
        raise ValidationError("label-prefix grouping needs page labels")
    keys = [label_prefix(lab) for lab in g.labels]
    _, ids = np.unique(np.array(keys), return_inverse=True)
    return Grouping(ids)


def node_parameters(g: WebGraph, grouping: Grouping) -> np.ndarray:
    """Fraction of each page's outlinks that leave its group."""
    if grouping.n != g.n:
        raise ValidationError("grouping and graph sizes differ")
    dangling = find_dangling(g)
    if dangling:
        raise ValidationError(f"repair dangling pages first (e.g. page {min(dangling) + 1})")
    a = grouping.assignment
    ea = g.edge_array
    external = np.bincount(ea[:, 0], weights=(a[ea[:, 0]] != a[ea[:, 1]]), minlength=g.n)
    delta = external / np.maximum(g.out_degree, 1)
    for d in g.uniform_columns:
        delta[d] = (g.n - grouping.sizes[a[d]]) / (g.n - 1)
    return delta


def regroup(g: WebGraph, initial: Grouping, delta: float, max_passes: Optional[int] = None):
    """Split pages off into single groups until every non-single page has
    node parameter at most ``delta``.

    Each pass detaches all current violators at once. Returns the final
    grouping (renumbered by first appearance).
    """
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    max_passes = g.n if max_passes is None else max_passes
    grouping = initial
    for _ in range(max_passes + 1):
        d = node_parameters(g, grouping)
        non_single = grouping.sizes[grouping.assignment] > 1
        violators = np.flatnonzero(non_single & (d > delta))
        if violators.size == 0:
            return grouping
        a = grouping.assignment.copy()
        a[violators] = grouping.r + np.arange(violators.size)
        grouping = Grouping(a)
    raise RuntimeError("regrouping did not terminate")  # each pass adds a single group


def error_bound_delta(m: float, epsilon: float) -> float:
    """Largest node parameter that guarantees ``||x' - x*||_1 <= epsilon``."""
    check_damping(m)
    if not 0.0 < epsilon < 1.0:
        raise ValidationError("epsilon must lie in (0, 1)")
    return m * epsilon / (4.0 * (1.0 - m) * (1.0 + epsilon))


@dataclass(frozen=True)
class Transform:
    """Structured coordinate change ``V = [V1; V2]`` and its inverse."""

    grouping: Grouping

    def __post_init__(self):
        self._verify()

    @cached_property
    def _heads(self):
        # every member except the last of each non-single group, in V2 row order
        pages, groups, lasts = [], [], []
        for g, mem in enumerate(self.grouping.members):
            if mem.size > 1:
                pages.append(mem[:-1])
                groups.append(np.full(mem.size - 1, g))
                lasts.append(np.full(mem.size - 1, mem[-1]))
        if not pages:
            e = np.empty(0, dtype=np.int64)
            return e, e, e
        return np.concatenate(pages), np.concatenate(groups), np.concatenate(lasts)

    @property
    def head_pages(self) -> np.ndarray:
        return self._heads[0]

    @property
    def head_groups(self) -> np.ndarray:
        return self._heads[1]

    @cached_property
    def offsets(self) -> np.ndarray:
        """Start of each group's rows inside the second coordinate block."""
        return np.concatenate([[0], np.cumsum(np.maximum(self.grouping.sizes - 1, 0))])

    @cached_property
    def V1(self) -> sp.csr_matrix:
        gp = self.grouping
        return sp.csr_matrix((np.ones(gp.n), (gp.assignment, np.arange(gp.n))), shape=(gp.r, gp.n))

    @cached_property
    def V1_inv(self) -> sp.csc_matrix:
        gp = self.grouping
        vals = 1.0 / gp.sizes[gp.assignment]
        return sp.csc_matrix((vals, (np.arange(gp.n), gp.assignment)), shape=(gp.n, gp.r))

    @cached_property
    def _select(self) -> sp.csr_matrix:
        pages = self.head_pages
        return sp.csr_matrix(
            (np.ones(pages.size), (np.arange(pages.size), pages)), shape=(pages.size, self.grouping.n)
        )

    @cached_property
    def _expand_mean(self) -> sp.csr_matrix:
        groups = self.head_groups
        gp = self.grouping
        return sp.csr_matrix(
            (1.0 / gp.sizes[groups], (np.arange(groups.size), groups)), shape=(groups.size, gp.r)
        )

    @cached_property
    def V2(self) -> sp.csr_matrix:
        return sp.csr_matrix(self._select - self._expand_mean @ self.V1)

    @cached_property
    def V2_inv(self) -> sp.csc_matrix:
        pages, _, lasts = self._heads
        c = np.arange(pages.size)
        rows = np.concatenate([pages, lasts])
        cols = np.concatenate([c, c])
        vals = np.concatenate([np.ones(c.size), -np.ones(c.size)])
        return sp.csc_matrix((vals, (rows, cols)), shape=(self.grouping.n, c.size))

    def apply_V2(self, B):
        """``V2 @ B`` without forming ``V2`` (rows of B minus group means)."""
        return self._select @ B - self._expand_mean @ (self.V1 @ B)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        x1 = self.V1 @ x
        return x1, self.apply_V2(x)

    def inverse(self, x1, x2) -> np.ndarray:
        return self.V1_inv @ np.asarray(x1, dtype=float) + self.V2_inv @ np.asarray(x2, dtype=float)

    def dense(self) -> np.ndarray:
        return np.vstack([self.V1.toarray(), self.V2.toarray()])

    def dense_inverse(self) -> np.ndarray:
        return np.hstack([self.V1_inv.toarray(), self.V2_inv.toarray()])

    def _verify(self):
        for mem in self.grouping.members:
            k = mem.size
            if k == 1:
                continue
            Vg = np.vstack([np.ones((1, k)), np.eye(k - 1, k) - 1.0 / k])
            Wg = np.hstack([np.full((k, 1), 1.0 / k), np.vstack([np.eye(k - 1), -np.ones((1, k - 1))])])
            if np.abs(Vg @ Wg - np.eye(k)).max() > 1e-12:
                raise ValidationError("coordinate transform failed its inverse check")


def build_transform(grouping: Grouping) -> Transform:
    return Transform(grouping)


def _slack(colsum: np.ndarray) -> np.ndarray:
    # 1 - colsum, with rounding noise on fully internal columns flushed to 0
    d = 1.0 - colsum
    d[np.abs(d) < 1e-14] = 0.0
    return d


def decompose_link_matrix(A: SparseColumnMatrix, grouping: Grouping):
    """Split ``A`` into internal, external-1 and external-2 parts.

    The internal part keeps links inside groups and sets each diagonal entry
    so the column sums to one. The external parts keep inter-group links of
    single-group columns (external-1) and of the remaining columns
    (external-2), each with diagonal entries making the column sum zero.
    The three sparse matrices add up to ``A``.
    """
    coo = A.matrix.tocoo()
    a = grouping.assignment
    n = A.n
    inside = a[coo.row] == a[coo.col]
    single_col = grouping.sizes[a[coo.col]] == 1

    def assemble(mask, diag):
        rows = np.concatenate([coo.row[mask], np.arange(n)])
        cols = np.concatenate([coo.col[mask], np.arange(n)])
        vals = np.concatenate([coo.data[mask], diag])
        m = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
        m.eliminate_zeros()
        return m

    col_in = np.bincount(coo.col[inside], weights=coo.data[inside], minlength=n)
    ext1 = ~inside & single_col
    ext2 = ~inside & ~single_col
    col_e1 = np.bincount(coo.col[ext1], weights=coo.data[ext1], minlength=n)
    col_e2 = np.bincount(coo.col[ext2], weights=coo.data[ext2], minlength=n)
    internal = assemble(inside, _slack(col_in))
    external1 = assemble(ext1, -col_e1)
    external2 = assemble(ext2, -col_e2)
    return internal, external1, external2


@dataclass
class AggregatedSystem:
    """Blocks of the triangularized system in group coordinates.

    ``A22_prime_blocks[g]`` is the ``(k-1) x (k-1)`` diagonal block for group
    ``g`` (None for single groups).
    """

    transform: Transform
    A11: sp.csc_matrix
    A21: sp.csr_matrix
    A22_prime_blocks: list
    u: np.ndarray

    @property
    def grouping(self) -> Grouping:
        return self.transform.grouping

    @property
    def n(self) -> int:
        return self.grouping.n

    @property
    def r(self) -> int:
        return self.grouping.r

    def A22_prime(self) -> sp.csr_matrix:
        blocks = [b for b in self.A22_prime_blocks if b is not None]
        if not blocks:
            return sp.csr_matrix((0, 0))
        return sp.block_diag(blocks, format="csr")


def _internal_block(A: SparseColumnMatrix, members: np.ndarray) -> np.ndarray:
    block = A.matrix[members][:, members].toarray()
    block[np.diag_indices_from(block)] = _slack(block.sum(axis=0))
    return block


def build_aggregated_system(A: SparseColumnMatrix, grouping: Grouping,
                            m: Optional[float] = None) -> AggregatedSystem:
    """Assemble ``A11``, ``A21`` and the block-diagonal ``A22'``.

    ``A11 = V1 A V1^-1`` and ``A21 = V2 A V1^-1`` are exact blocks of
    ``V A V^-1``. ``A22'`` is the ``(2,2)`` block of ``V Int V^-1`` where
    ``Int`` is the internal part of :func:`decompose_link_matrix`; it is
    block diagonal because ``Int`` and ``V`` are. ``m`` is accepted for
    signature symmetry and is not needed until the solve.
    """
    if not A.is_stochastic:
        raise ValidationError("aggregation needs a column-stochastic matrix")
    if grouping.n != A.n:
        raise ValidationError("grouping and matrix sizes differ")
    tf = build_transform(grouping)
    B1 = sp.csc_matrix(A.matrix @ tf.V1_inv)
    A11 = sp.csc_matrix(tf.V1 @ B1)
    A11.eliminate_zeros()
    A21 = sp.csr_matrix(tf.apply_V2(B1))
    A21.eliminate_zeros()
    blocks = []
    for mem in grouping.members:
        k = mem.size
        if k == 1:
            blocks.append(None)
            continue
        inner = _internal_block(A, mem)
        # V2_g Int_g V2inv_g with V2_g = [I 0] - 1/k, V2inv_g = [I; -1^T]
        right = inner[:, :-1] - inner[:, [-1]]
        blocks.append(right[:-1] - right.mean(axis=0, keepdims=True))
    sums = np.asarray(A11.sum(axis=0)).ravel()
    if np.abs(sums - 1.0).max() > 1e-10:
        raise ValidationError("aggregated matrix A11 is not column stochastic")
    return AggregatedSystem(tf, A11, A21, blocks, grouping.sizes.astype(float))


def transformed_blocks(A: SparseColumnMatrix, transform: Transform):
    """All four blocks of ``V A V^-1``: ``(A11, A12, A21, A22)`` as sparse matrices."""
    B1 = A.matrix @ transform.V1_inv
    B2 = A.matrix @ transform.V2_inv
    return (
        sp.csr_matrix(transform.V1 @ B1),
        sp.csr_matrix(transform.V1 @ B2),
        sp.csr_matrix(transform.apply_V2(B1)),
        sp.csr_matrix(transform.apply_V2(B2)),
    )


@dataclass
class AggregationReport(SolveReport):
    x1: Optional[np.ndarray] = None
    x2: Optional[np.ndarray] = None


def _step2_factors(sys: AggregatedSystem, m: float) -> list:
    factors = []
    for g, block in enumerate(sys.A22_prime_blocks):
        if block is None:
            factors.append(None)
            continue
        lhs = np.eye(block.shape[0]) - (1.0 - m) * block
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", la.LinAlgWarning)
            lu, piv = la.lu_factor(lhs, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if pivots.min() <= 1e-13 * max(pivots.max(), 1.0):
            raise SingularBlockError(g)
        factors.append((lu, piv))
    return factors


def _complete(sys: AggregatedSystem, m: float, x1: np.ndarray, factors) -> tuple:
    rhs = (1.0 - m) * (sys.A21 @ x1)
    x2 = np.empty_like(rhs)
    off = sys.transform.offsets
    for g, fac in enumerate(factors):
        if fac is not None:
            x2[off[g]:off[g + 1]] = la.lu_solve(fac, rhs[off[g]:off[g + 1]])
    return sys.transform.inverse(x1, x2), x2


def approximate_pagerank(sys: AggregatedSystem, m: float = 0.15, tol: float = 1e-10,
                         max_iter: int = 1000, x1_0=None):
    """Approximate PageRank in three steps.

    1. Iterate ``x1 <- (1 - m) A11 x1 + (m / n) u`` to tolerance.
    2. Solve ``x2 = (1 - m) [I - (1 - m) A22']^-1 A21 x1`` group by group.
    3. Map back with ``x' = V^-1 [x1; x2]``.

    Returns ``x'`` (length ``n``, sums to one) and an :class:`AggregationReport`
    carrying the step-1 history and both transformed parts.
    """
    check_damping(m)
    r = sys.r
    x1_0 = np.full(r, 1.0 / r) if x1_0 is None else np.asarray(x1_0, dtype=float)
    x1, rep = damped_power(sys.A11.__matmul__, (m / sys.n) * sys.u, x1_0, m, tol, max_iter)
    x_prime, x2 = _complete(sys, m, x1, _step2_factors(sys, m))
    report = AggregationReport(rep.iterations, rep.residual_history, rep.converged, x1, x2)
    return x_prime, report


@dataclass
class AggregatedGossipTrace:
    """Checkpointed gossip on the group-level system.

    ``estimates[c]`` is the page vector rebuilt from the time-averaged group
    values at ``steps[c]``; ``l1_error`` compares it with the reference.
    """

    steps: np.ndarray
    estimates: np.ndarray
    group_trace: object
    l1_error: Optional[np.ndarray] = None


def aggregated_gossip(sys: AggregatedSystem, m: float, seed: int, steps: int,
                      checkpoint_every: int = 100, x_star=None, x1_0=None,
                      damping: Optional[float] = None, mode: str = SINGLE_UNIFORM,
                      p: Optional[float] = None) -> AggregatedGossipTrace:
    """Run step 1 by gossip over the ``r`` groups, steps 2-3 at checkpoints.

    The group-level update is ``x1 <- (1 - mh) A11_i x1 + mh u / n`` with
    ``mh = gossip_damping(m, r)`` unless overridden.
    """
    check_damping(m)
    r = sys.r
    if damping is None:
        damping = gossip_damping(m, r, p if mode != SINGLE_UNIFORM else None)
    trace = _run_on_matrix(
        sp.csc_matrix(sys.A11), m, [seed], steps, mode, p, checkpoint_every, None, x1_0,
        damping, sys.u / sys.n,
    )[0]
    factors = _step2_factors(sys, m)
    estimates = np.stack([_complete(sys, m, y1, factors)[0] for y1 in trace.averages])
    out = AggregatedGossipTrace(trace.steps, estimates, trace)
    if x_star is not None:
        out.l1_error = np.abs(estimates - np.asarray(x_star)[None, :]).sum(axis=1)
    return out


def operation_counts(A: SparseColumnMatrix, sys: AggregatedSystem) -> dict:
    """Nonzero counts entering the per-step operation costs."""
    a = sys.grouping.assignment
    coo = A.matrix.tocoo()
    return {
        "f0_A": int(A.nnz),
        "f0_A11": int(sys.A11.nnz),
        "f0_A_ext": int(np.count_nonzero(a[coo.row] != a[coo.col])),
        "n": int(A.n),
        "r": int(sys.r),
    }
