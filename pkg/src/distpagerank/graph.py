"""Web graphs, dangling-page repair and the column-stochastic hyperlink matrix.

Pages are 0-based everywhere inside the package. Text formats (edge lists,
grouping files) are 1-based by default; the conversion happens only in
:func:`parse_edge_list` and :func:`format_edge_list`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .exceptions import ParseError, UnrepairableError, ValidationError

logger = logging.getLogger(__name__)

BACK_LINKS = "back_links"
UNIFORM_COLUMN = "uniform_column"

STOCHASTIC = "stochastic"
SUBSTOCHASTIC = "substochastic"


@dataclass(frozen=True)
class WebGraph:
    """Directed graph of ``n`` pages.

    ``edges`` holds pairs ``(i, j)`` meaning page ``i`` links to page ``j``.
    ``uniform_columns`` lists dangling pages whose hyperlink column is filled
    uniformly over all other pages (see :func:`repair_dangling`).
    ``duplicates`` counts edges collapsed while parsing.
    """

    n: int
    edges: frozenset
    labels: Optional[tuple] = None
    uniform_columns: frozenset = field(default_factory=frozenset)
    duplicates: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError(f"a web graph needs at least 2 pages, got {self.n}")
        for i, j in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j:
                raise ValidationError(f"self-loop on page {i + 1}")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValidationError("labels must have one entry per page")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, labels=None) -> "WebGraph":
        return cls(n, frozenset((int(i), int(j)) for i, j in edges), labels)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(E, 2)`` int array sorted by (source, target)."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.bincount(self.edge_array[:, 0], minlength=self.n)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.bincount(self.edge_array[:, 1], minlength=self.n)

    def successors(self, i: int) -> np.ndarray:
        ea = self.edge_array
        lo, hi = np.searchsorted(ea[:, 0], [i, i + 1])
        return ea[lo:hi, 1]

    def predecessors(self, j: int) -> np.ndarray:
        ea = self.edge_array
        return np.sort(ea[ea[:, 1] == j, 0])

    @property
    def num_edges(self) -> int:
        return len(self.edges)


def parse_edge_list(text, one_based: bool = True) -> WebGraph:
    """Parse an edge list into a :class:`WebGraph`.

    Each non-comment line holds ``src dst``. Lines starting with ``#`` and
    blank lines are skipped. An optional directive ``n=<int>`` (before any
    edge) fixes the page count; otherwise it is the largest index seen.
    Duplicate edges are collapsed and counted in ``WebGraph.duplicates``.
    """
    if not isinstance(text, str):
        text = text.read()
    offset = 1 if one_based else 0
    declared_n = None
    edges = set()
    duplicates = 0
    max_index = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.replace(" ", "").startswith("n="):
            if edges or declared_n is not None:
                raise ParseError("the n=<int> directive must precede all edges", lineno)
            try:
                declared_n = int(line.replace(" ", "")[2:])
            except ValueError:
                raise ParseError(f"bad page-count directive {line!r}", lineno) from None
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected two integers, got {line!r}", lineno)
        try:
            src, dst = int(tokens[0]) - offset, int(tokens[1]) - offset
        except ValueError:
            raise ParseError(f"expected two integers, got {line!r}", lineno) from None
        if src < 0 or dst < 0:
            raise ValidationError(f"line {lineno}: page index below {offset}")
        if src == dst:
            raise ValidationError(f"line {lineno}: self-loop on page {src + offset}")
        if (src, dst) in edges:
            duplicates += 1
            continue
        edges.add((src, dst))
        max_index = max(max_index, src, dst)

    n = max_index + 1 if declared_n is None else declared_n
    if declared_n is not None and max_index >= declared_n:
        raise ValidationError(f"page {max_index + offset} exceeds declared n={declared_n}")
    if duplicates:
        logger.warning("collapsed %d duplicate edges", duplicates)
    return WebGraph(n, frozenset(edges), duplicates=duplicates)


def format_edge_list(g: WebGraph, one_based: bool = True) -> str:
    offset = 1 if one_based else 0
    lines = [f"n={g.n}"]
    lines += [f"{i + offset} {j + offset}" for i, j in g.edge_array]
    return "\n".join(lines) + "\n"


def read_edge_list(path, one_based: bool = True) -> WebGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read(), one_based=one_based)


def read_labels(path, g: WebGraph, one_based: bool = True) -> WebGraph:
    """Attach page labels from lines ``page_index label``."""
    offset = 1 if one_based else 0
    labels = [None] * g.n
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ParseError(f"expected 'page label', got {line!r}", lineno)
            try:
                page = int(parts[0]) - offset
            except ValueError:
                raise ParseError(f"bad page index {parts[0]!r}", lineno) from None
            if not 0 <= page < g.n:
                raise ValidationError(f"line {lineno}: page {parts[0]} out of range")
            labels[page] = parts[1]
    missing = [i + offset for i, lab in enumerate(labels) if lab is None]
    if missing:
        raise ValidationError(f"no label for pages {missing[:10]}")
    return WebGraph(g.n, g.edges, tuple(labels), g.uniform_columns, g.duplicates)


def find_dangling(g: WebGraph) -> set:
    """Pages with no outgoing edges that have not been given a uniform column."""
    return {int(i) for i in np.flatnonzero(g.out_degree == 0)} - set(g.uniform_columns)


def repair_dangling(g: WebGraph, policy: str = BACK_LINKS) -> WebGraph:
    """Remove dangling pages.

    ``back_links`` adds an edge from each dangling page back to every page
    that links to it. ``uniform_column`` leaves the edges alone and marks the
    page so that :func:`hyperlink_matrix` spreads its column evenly over the
    other ``n - 1`` pages.
    """
    dangling = sorted(find_dangling(g))
    if not dangling:
        return g
    if policy == BACK_LINKS:
        new_edges = set(g.edges)
        for d in dangling:
            preds = g.predecessors(d)
            if preds.size == 0:
                raise UnrepairableError(d)
            new_edges.update((d, int(j)) for j in preds)
        return WebGraph(g.n, frozenset(new_edges), g.labels, g.uniform_columns, g.duplicates)
    if policy == UNIFORM_COLUMN:
        return WebGraph(
            g.n, g.edges, g.labels, g.uniform_columns | frozenset(dangling), g.duplicates
        )
    raise ValueError(f"unknown repair policy {policy!r}")


def prune_no_inlinks(g: WebGraph):
    """Drop pages without incoming links (single pass).

    Returns the reduced graph and the original indices of the kept pages.
    """
    keep = np.flatnonzero(g.in_degree > 0)
    if keep.size == g.n:
        return g, np.arange(g.n)
    new_index = -np.ones(g.n, dtype=np.int64)
    new_index[keep] = np.arange(keep.size)
    edges = frozenset(
        (int(new_index[i]), int(new_index[j]))
        for i, j in g.edges
        if new_index[i] >= 0 and new_index[j] >= 0
    )
    labels = None if g.labels is None else tuple(g.labels[k] for k in keep)
    uniform = frozenset(int(new_index[k]) for k in g.uniform_columns if new_index[k] >= 0)
    return WebGraph(int(keep.size), edges, labels, uniform, g.duplicates), keep


@dataclass(frozen=True)
class SparseColumnMatrix:
    """Nonnegative square matrix in compressed-column form.

    Wraps a ``scipy.sparse.csc_matrix`` whose buffers are made read-only.
    ``stochasticity`` is ``"stochastic"`` when every column sums to one and
    ``"substochastic"`` otherwise.
    """

    matrix: sp.csc_matrix
    stochasticity: str

    def __post_init__(self):
        mat = sp.csc_matrix(self.matrix)
        mat.sum_duplicates()
        mat.eliminate_zeros()
        if mat.shape[0] != mat.shape[1]:
            raise ValidationError(f"matrix must be square, got {mat.shape}")
        if mat.nnz and mat.data.min() <= 0:
            raise ValidationError("stored entries must be positive")
        sums = np.asarray(mat.sum(axis=0)).ravel()
        if self.stochasticity == STOCHASTIC:
            if np.any(np.abs(sums - 1.0) > 1e-12):
                raise ValidationError("a stochastic matrix needs unit column sums")
        elif self.stochasticity == SUBSTOCHASTIC:
            if np.any(sums > 1.0 + 1e-12):
                raise ValidationError("column sums exceed one")
        else:
            raise ValueError(f"unknown stochasticity {self.stochasticity!r}")
        for buf in (mat.data, mat.indices, mat.indptr):
            buf.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_dense(cls, dense, stochasticity=None) -> "SparseColumnMatrix":
        dense = np.asarray(dense, dtype=float)
        if stochasticity is None:
            stochasticity = (
                STOCHASTIC if np.allclose(dense.sum(axis=0), 1.0, atol=1e-12) else SUBSTOCHASTIC
            )
        return cls(sp.csc_matrix(dense), stochasticity)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def is_stochastic(self) -> bool:
        return self.stochasticity == STOCHASTIC

    def column(self, j: int):
        """Row indices and values stored in column ``j``."""
        lo, hi = self.matrix.indptr[j], self.matrix.indptr[j + 1]
        return self.matrix.indices[lo:hi], self.matrix.data[lo:hi]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, x):
        return self.matrix @ x


def hyperlink_matrix(g: WebGraph) -> SparseColumnMatrix:
    """Column ``j`` holds ``1 / outdeg(j)`` at each page ``j`` links to."""
    ea = g.edge_array
    deg = g.out_degree
    rows = [ea[:, 1]]
    cols = [ea[:, 0]]
    vals = [1.0 / deg[ea[:, 0]]]
    for d in sorted(g.uniform_columns):
        others = np.delete(np.arange(g.n), d)
        rows.append(others)
        cols.append(np.full(others.size, d))
        vals.append(np.full(others.size, 1.0 / (g.n - 1)))
    mat = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(g.n, g.n)
    )
    stochasticity = SUBSTOCHASTIC if find_dangling(g) else STOCHASTIC
    return SparseColumnMatrix(mat, stochasticity)
