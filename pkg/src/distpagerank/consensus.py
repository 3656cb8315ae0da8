"""Randomized multi-agent consensus over switching communication patterns.

A pattern is a set of directed pairs ``(l, j)`` meaning agent ``l`` sends
its value to agent ``j``; every pattern contains all self-loops. The matrix
of a pattern is row stochastic: row ``j`` averages the values of the agents
sending to ``j``. At each step one pattern is drawn uniformly at random.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .exceptions import ParseError, ValidationError
from .graph import WebGraph

PER_PAGE = "per-page"
STATIC = "static"


def _loops(n: int) -> frozenset:
    return frozenset((j, j) for j in range(n))


@dataclass(frozen=True)
class CommPatternSet:
    """``d`` communication patterns over ``n`` agents (0-based pairs)."""

    n: int
    patterns: tuple

    def __post_init__(self):
        pats = tuple(frozenset((int(a), int(b)) for a, b in p) for p in self.patterns)
        if not pats:
            raise ValidationError("at least one pattern is required")
        loops = _loops(self.n)
        for i, p in enumerate(pats):
            if not loops <= p:
                raise ValidationError(f"pattern {i + 1} is missing self-loops")
            for a, b in p:
                if not (0 <= a < self.n and 0 <= b < self.n):
                    raise ValidationError(f"pattern {i + 1} has pair ({a}, {b}) out of range")
        object.__setattr__(self, "patterns", pats)

    @property
    def d(self) -> int:
        return len(self.patterns)

    def union(self) -> frozenset:
        return frozenset().union(*self.patterns)

    def covers(self, edges: Iterable) -> bool:
        """True if the union of patterns equals ``edges`` plus self-loops."""
        return self.union() == frozenset(edges) | _loops(self.n)

    def matrices(self) -> list:
        return [consensus_matrix(p, self.n) for p in self.patterns]


def consensus_matrix(pattern, n: int) -> sp.csr_matrix:
    """Row-stochastic matrix with ``(A)_{j,l} = 1 / n_j`` for each ``(l, j)``."""
    pairs = np.array(sorted(pattern), dtype=np.int64).reshape(-1, 2)
    senders, receivers = pairs[:, 0], pairs[:, 1]
    counts = np.bincount(receivers, minlength=n)
    if np.any(counts == 0):
        raise ValidationError("every agent needs a self-loop in the pattern")
    return sp.csr_matrix((1.0 / counts[receivers], (receivers, senders)), shape=(n, n))


def pattern_from_page(g: WebGraph, i: int) -> frozenset:
    """Links of ``g`` into or out of agent ``i``, plus all self-loops."""
    return frozenset((a, b) for a, b in g.edges if i in (a, b)) | _loops(g.n)


def per_page_patterns(g: WebGraph) -> CommPatternSet:
    return CommPatternSet(g.n, tuple(pattern_from_page(g, i) for i in range(g.n)))


def static_pattern(g: WebGraph) -> CommPatternSet:
    return CommPatternSet(g.n, (frozenset(g.edges) | _loops(g.n),))


def read_patterns(path, n: int, one_based: bool = True) -> CommPatternSet:
    """Patterns from a text file: pairs ``l j`` one per line, blank line or
    ``---`` between patterns. Self-loops are added automatically."""
    offset = 1 if one_based else 0
    patterns, current = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith("#"):
                continue
            if not line or line == "---":
                if current:
                    patterns.append(current)
                    current = set()
                continue
            parts = line.split()
            try:
                a, b = (int(t) - offset for t in parts)
            except ValueError:
                raise ParseError(f"expected two integers, got {line!r}", lineno) from None
            current.add((a, b))
    if current:
        patterns.append(current)
    loops = _loops(n)
    return CommPatternSet(n, tuple(frozenset(p) | loops for p in patterns))


def globally_reachable(n: int, edges: Iterable) -> bool:
    """True if some agent's value can reach every agent along ``edges``.

    Equivalently, the condensation of the graph has a single source
    component.
    """
    pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
    adj = sp.csr_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    entered = np.zeros(ncomp, dtype=bool)
    cross = labels[pairs[:, 0]] != labels[pairs[:, 1]]
    entered[labels[pairs[cross, 1]]] = True
    return int(np.count_nonzero(~entered)) == 1


def disagreement(x) -> float:
    x = np.asarray(x)
    return float(x.max() - x.min())


@dataclass
class ConsensusTrace:
    """``disagreement[k]`` is ``max x(k) - min x(k)`` for ``k = 0..steps``."""

    seed: int
    disagreement: np.ndarray
    final: np.ndarray
    choices: np.ndarray


def consensus_run(patterns: CommPatternSet, x0, seed: int, steps: int) -> ConsensusTrace:
    """Iterate ``x(k+1) = A_theta(k) x(k)`` with ``theta`` uniform over patterns."""
    if steps < 1:
        raise ValidationError("steps must be at least 1")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (patterns.n,) or not np.all(np.isfinite(x)):
        raise ValidationError(f"x0 must be a finite vector of length {patterns.n}")
    mats = patterns.matrices()
    choices = np.random.Generator(np.random.PCG64(seed)).integers(patterns.d, size=steps)
    dis = np.empty(steps + 1)
    dis[0] = disagreement(x)
    for k, c in enumerate(choices, start=1):
        x = mats[c] @ x
        dis[k] = x.max() - x.min()
    return ConsensusTrace(int(seed), dis, x, choices)


def consensus_mse(traces) -> np.ndarray:
    """Seed-ensemble mean of ``max_{i,j} (x_i - x_j)^2`` at each step."""
    return np.mean([t.disagreement ** 2 for t in traces], axis=0)
