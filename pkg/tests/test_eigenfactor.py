import numpy as np
import pytest
from hypothesis import given, strategies as st

from distpagerank.cli import fixture_path
from distpagerank.eigenfactor import (CitationData, cross_citation, eigenfactor,
                                      read_citation_csvs)
from distpagerank.exceptions import ValidationError


def dense_oracle(data, m=0.15):
    """Solve (I - (1 - m) A_tilde) x = m v directly, then apply the formulas."""
    D = np.array(data.D)
    n = D.shape[0]
    cs = D.sum(axis=0)
    v = data.articles / data.articles.sum()
    A = np.where(cs > 0, D / np.where(cs > 0, cs, 1), 0.0)
    At = np.where(cs > 0, A, v[:, None])
    x = np.linalg.solve(np.eye(n) - (1 - m) * At, m * v)
    ef = 100 * A @ x / (A @ x).sum()
    return x, ef


def test_symmetric_pair():
    data = CitationData([[0, 5], [3, 0]], [10, 10])
    A, At, v = cross_citation(data)
    np.testing.assert_array_equal(A.toarray(), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(At.toarray(), A.toarray())
    np.testing.assert_array_equal(v, [0.5, 0.5])
    res = eigenfactor(data)
    np.testing.assert_array_equal(res.EF, [50.0, 50.0])
    np.testing.assert_allclose(res.AI, [1.0, 1.0], rtol=1e-14)
    np.testing.assert_allclose(res.influence, [0.5, 0.5], rtol=1e-14)


def test_zero_column_replaced_by_articles():
    data = CitationData([[0, 0, 0], [4, 0, 0], [1, 0, 0]], [1, 2, 1])
    _, At, v = cross_citation(data)
    np.testing.assert_array_equal(At.toarray()[:, 1], v)
    np.testing.assert_array_equal(At.toarray()[:, 2], v)


def test_self_citations_ignored():
    a = CitationData([[9, 2, 1], [3, 0, 4], [1, 1, 7]], [5, 6, 7])
    b = CitationData([[0, 2, 1], [3, 0, 4], [1, 1, 0]], [5, 6, 7])
    assert np.array_equal(eigenfactor(a).EF, eigenfactor(b).EF)


def test_zero_articles():
    with pytest.raises(ValidationError):
        CitationData([[0, 1], [1, 0]], [0, 0])
    res = eigenfactor(CitationData([[0, 1], [1, 0]], [0, 3]))
    assert np.isnan(res.AI[0]) and np.isfinite(res.AI[1])


def test_dominant_journal():
    D = np.zeros((3, 3))
    D[0, 1] = D[0, 2] = 10
    data = CitationData(D, [1, 1, 1])
    res = eigenfactor(data)
    assert np.argmax(res.EF) == 0
    small_m = eigenfactor(data, m=1e-6, tol=1e-14, max_iter=100000)
    assert small_m.EF[0] > 99.99


def test_fixture_files():
    data = read_citation_csvs(fixture_path("citations.csv"), fixture_path("articles.csv"))
    assert data.journals == ("Journal A", "Journal B", "Journal C")
    assert data.D[2, 2] == 0 and data.D[1, 0] == 12
    res = eigenfactor(data)
    x, ef = dense_oracle(data)
    np.testing.assert_allclose(res.EF, ef, atol=1e-10)
    assert [data.journals[i] for i in res.ranking()] == ["Journal B", "Journal A", "Journal C"]


@given(st.integers(2, 12), st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
def test_matches_dense_oracle(n, seed, m):
    rng = np.random.default_rng(seed)
    D = rng.integers(0, 20, size=(n, n)) * (rng.random((n, n)) < 0.6)
    articles = rng.integers(1, 100, size=n)
    data = CitationData(D, articles)
    if data.D.sum() == 0:
        with pytest.raises(ValidationError):
            eigenfactor(data, m)
        return
    res = eigenfactor(data, m)
    x, ef = dense_oracle(data, m)
    np.testing.assert_allclose(res.influence, x, atol=1e-10)
    np.testing.assert_allclose(res.EF, ef, atol=1e-10)
    assert abs(res.EF.sum() - 100) < 1e-8
    assert np.all(res.influence > 0)
    _, At, _ = cross_citation(data)
    np.testing.assert_allclose(At.toarray().sum(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(res.AI, 0.01 * res.EF / (articles / articles.sum()), rtol=1e-12)
