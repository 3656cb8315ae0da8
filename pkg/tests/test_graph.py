import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from distpagerank.exceptions import ParseError, UnrepairableError, ValidationError
from distpagerank.graph import (BACK_LINKS, UNIFORM_COLUMN, SparseColumnMatrix, WebGraph,
                                find_dangling, format_edge_list, hyperlink_matrix,
                                parse_edge_list, prune_no_inlinks, repair_dangling)

# Reference hyperlink matrix of the repaired six-page web.
A6_REF = np.array([
    [0, 1 / 2, 0, 0, 0, 0],
    [1 / 2, 0, 1 / 3, 0, 0, 0],
    [0, 1 / 2, 0, 1 / 3, 0, 0],
    [1 / 2, 0, 1 / 3, 0, 0, 1 / 2],
    [0, 0, 0, 1 / 3, 0, 1 / 2],
    [0, 0, 1 / 3, 1 / 3, 1, 0],
])


def test_six_page_matrix_matches_reference(A6):
    assert A6.is_stochastic
    np.testing.assert_array_equal(A6.toarray(), A6_REF)


def test_fixture_sizes(six_page, six_page_dangling):
    assert (six_page.n, six_page.num_edges) == (6, 13)
    assert six_page_dangling.num_edges == 12
    assert find_dangling(six_page_dangling) == {4}


def test_back_links_on_dangling_fixture(six_page_dangling):
    repaired = repair_dangling(six_page_dangling, BACK_LINKS)
    added = repaired.edges - six_page_dangling.edges
    assert (4, 5) in added
    # the rule links back to every page pointing at page 5 (pages 4 and 6)
    assert added == {(4, 3), (4, 5)}
    assert not find_dangling(repaired)
    assert hyperlink_matrix(repaired).is_stochastic


def test_uniform_column_repair(six_page_dangling):
    g = repair_dangling(six_page_dangling, UNIFORM_COLUMN)
    A = hyperlink_matrix(g)
    assert A.is_stochastic
    np.testing.assert_allclose(A.toarray()[:, 4], [0.2, 0.2, 0.2, 0.2, 0, 0.2])


def test_unrepaired_matrix_is_substochastic(six_page_dangling):
    A = hyperlink_matrix(six_page_dangling)
    assert not A.is_stochastic
    assert A.toarray()[:, 4].sum() == 0


def test_unrepairable_page():
    g = WebGraph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(UnrepairableError, match="page 3"):
        repair_dangling(g)


def test_no_dangling_is_identity(six_page):
    assert repair_dangling(six_page) is six_page


def test_parse_errors():
    with pytest.raises(ParseError, match="line 2"):
        parse_edge_list("1 2\n1 2 3\n")
    with pytest.raises(ParseError, match="line 1"):
        parse_edge_list("a b\n")
    with pytest.raises(ValidationError):
        parse_edge_list("1 1\n")
    with pytest.raises(ValidationError):
        parse_edge_list("0 1\n")
    with pytest.raises(ParseError):
        parse_edge_list("1 2\nn=3\n")
    with pytest.raises(ValidationError):
        parse_edge_list("n=2\n1 3\n")


def test_duplicates_are_counted(caplog):
    with caplog.at_level(logging.WARNING):
        g = parse_edge_list("# comment\n\n1 2\n2 1\n1 2\n")
    assert g.duplicates == 1 and g.num_edges == 2
    assert "duplicate" in caplog.text


def test_declared_size_allows_isolated_pages():
    g = parse_edge_list("n=4\n1 2\n2 1\n")
    assert g.n == 4 and find_dangling(g) == {2, 3}


def test_zero_based():
    g = parse_edge_list("0 1\n1 0\n", one_based=False)
    assert g.edges == {(0, 1), (1, 0)}


def test_graph_validation():
    with pytest.raises(ValidationError):
        WebGraph.from_edges(1, [])
    with pytest.raises(ValidationError):
        WebGraph.from_edges(3, [(0, 3)])


def test_prune_no_inlinks():
    g = WebGraph.from_edges(4, [(0, 1), (1, 2), (2, 1), (3, 2)])
    pruned, kept = prune_no_inlinks(g)
    np.testing.assert_array_equal(kept, [1, 2])
    assert pruned.edges == {(0, 1), (1, 0)}


def test_sparse_matrix_checks():
    with pytest.raises(ValidationError):
        SparseColumnMatrix.from_dense([[0.5, 0], [0.6, 1]], "stochastic")
    with pytest.raises(ValidationError):
        SparseColumnMatrix.from_dense([[0, -1], [1, 0]])
    A = SparseColumnMatrix.from_dense([[0, 1], [1, 0]])
    assert A.is_stochastic and A.nnz == 2
    with pytest.raises(ValueError):
        A.matrix.data[0] = 3.0
    rows, vals = A.column(0)
    assert rows.tolist() == [1] and vals.tolist() == [1.0]


edge_lists = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])),
    )
)


@given(edge_lists)
def test_round_trip(data):
    n, edges = data
    g = WebGraph.from_edges(n, edges)
    assert parse_edge_list(format_edge_list(g)).edges == g.edges
    assert parse_edge_list(format_edge_list(g, False), one_based=False).n == n


@given(edge_lists, st.sampled_from([BACK_LINKS, UNIFORM_COLUMN]))
def test_repair_gives_stochastic_matrix(data, policy):
    n, edges = data
    g = WebGraph.from_edges(n, edges)
    try:
        r = repair_dangling(g, policy)
    except UnrepairableError as exc:
        assert g.in_degree[exc.page] == 0 and g.out_degree[exc.page] == 0
        return
    A = hyperlink_matrix(r)
    assert A.is_stochastic
    assert np.all(np.diag(A.toarray()) == 0)
    np.testing.assert_allclose(A.toarray().sum(axis=0), 1.0, atol=1e-12)
    assert g.edges <= r.edges
