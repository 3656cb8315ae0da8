"""Eigenfactor Score and Article Influence from journal citation counts."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .exceptions import ParseError, ValidationError
from .graph import SUBSTOCHASTIC, SparseColumnMatrix
from .pagerank import DEFAULT_DAMPING, SolveReport, check_damping, damped_power


@dataclass(frozen=True)
class CitationData:
    """``D[i, j]`` counts citations from journal ``j`` to journal ``i``.

    The diagonal is zeroed on construction, so self-citations never count.
    """

    D: np.ndarray
    articles: np.ndarray
    journals: Optional[tuple] = None

    def __post_init__(self):
        D = np.array(self.D, dtype=float)
        a = np.array(self.articles, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValidationError("citation matrix must be square")
        if a.shape != (D.shape[0],):
            raise ValidationError("need one article count per journal")
        if np.any(D < 0) or np.any(a < 0):
            raise ValidationError("counts must be nonnegative")
        if a.sum() <= 0:
            raise ValidationError("total article count must be positive")
        if self.journals is not None and len(self.journals) != a.size:
            raise ValidationError("need one name per journal")
        np.fill_diagonal(D, 0.0)
        D.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "articles", a)

    @property
    def n(self) -> int:
        return self.articles.size


def read_citation_csvs(citations_path, articles_path) -> CitationData:
    """Load ``citing_journal,cited_journal,count`` and ``journal,articles`` CSVs.

    Journals are indexed in the order of the articles file.
    """
    with open(articles_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        journals = tuple(r["journal"].strip() for r in rows)
        articles = [float(r["articles"]) for r in rows]
    except (KeyError, ValueError, AttributeError) as exc:
        raise ParseError(f"articles file needs columns journal,articles ({exc})") from None
    index = {name: i for i, name in enumerate(journals)}
    if len(index) != len(journals):
        raise ValidationError("duplicate journal in articles file")
    D = np.zeros((len(journals), len(journals)))
    with open(citations_path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                j = index[row["citing_journal"].strip()]
                i = index[row["cited_journal"].strip()]
                D[i, j] += float(row["count"])
            except KeyError as exc:
                raise ValidationError(f"line {lineno}: unknown journal or column {exc}") from None
            except (ValueError, AttributeError):
                raise ParseError(f"bad count {row.get('count')!r}", lineno) from None
    return CitationData(D, np.array(articles), journals)


def cross_citation(data: CitationData):
    """Return ``(A, A_tilde, v)``.

    ``A`` is ``D`` with each nonzero column scaled to sum to one (zero
    columns stay zero). ``A_tilde`` replaces the zero columns with the
    article share vector ``v``.
    """
    D = data.D
    colsum = D.sum(axis=0)
    nz = colsum > 0
    A = np.zeros_like(D)
    A[:, nz] = D[:, nz] / colsum[nz]
    v = data.articles / data.articles.sum()
    A_tilde = A.copy()
    A_tilde[:, ~nz] = v[:, None]
    return (
        SparseColumnMatrix(sp.csc_matrix(A), SUBSTOCHASTIC),
        SparseColumnMatrix(sp.csc_matrix(A_tilde), "stochastic"),
        v,
    )


@dataclass
class EigenfactorResult:
    influence: np.ndarray
    EF: np.ndarray
    AI: np.ndarray
    report: SolveReport
    journals: Optional[tuple] = None

    def ranking(self) -> np.ndarray:
        """Journal indices by descending EF; ties keep input order."""
        return np.argsort(-self.EF, kind="stable")


def eigenfactor(data: CitationData, m: float = DEFAULT_DAMPING, tol: float = 1e-13,
                max_iter: int = 10000) -> EigenfactorResult:
    """Influence vector, Eigenfactor Score and Article Influence.

    Iterates ``x <- (1 - m) A_tilde x + m v``. The score is
    ``EF = 100 A x / sum(A x)`` with the unmodified ``A``; Article Influence
    is ``0.01 EF / v`` and NaN wherever ``v`` is zero.
    """
    check_damping(m)
    A, A_tilde, v = cross_citation(data)
    x0 = np.full(data.n, 1.0 / data.n)
    x, report = damped_power(A_tilde.matrix.__matmul__, m * v, x0, m, tol, max_iter)
    weighted = A @ x
    total = weighted.sum()
    if total <= 0:
        raise ValidationError("no cross-citations; Eigenfactor is undefined")
    EF = 100.0 * weighted / total
    with np.errstate(divide="ignore", invalid="ignore"):
        AI = np.where(v > 0, 0.01 * EF / np.where(v > 0, v, 1.0), np.nan)
    return EigenfactorResult(x, EF, AI, report, data.journals)
