import numpy as np
import pytest
from hypothesis import settings

from distpagerank.aggregation import Grouping, read_grouping
from distpagerank.cli import fixture_path
from distpagerank.graph import WebGraph, hyperlink_matrix, read_edge_list, repair_dangling

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def dense_pagerank(A_dense, m=0.15):
    """Oracle: solve (I - (1 - m) A) x = (m / n) 1 directly."""
    n = A_dense.shape[0]
    return np.linalg.solve(np.eye(n) - (1 - m) * A_dense, np.full(n, m / n))


def random_web(rng, n, p=None):
    """Random graph repaired with back links; pages without any in- or
    outlink get a link to and from a random partner first."""
    p = p if p is not None else min(1.0, 3.0 / n)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    for i in range(n):
        if not mask[i].any() and not mask[:, i].any():
            j = (i + 1 + rng.integers(n - 1)) % n
            mask[j, i] = True
    edges = list(zip(*np.nonzero(mask)))
    return repair_dangling(WebGraph.from_edges(n, edges))


def clustered_web(rng, n, clusters, p_in=0.3, p_out=0.01):
    labels = rng.integers(clusters, size=n)
    same = labels[:, None] == labels[None, :]
    mask = rng.random((n, n)) < np.where(same, p_in, p_out)
    np.fill_diagonal(mask, False)
    for i in range(n):
        if not mask[i].any() and not mask[:, i].any():
            j = (i + 1 + rng.integers(n - 1)) % n
            mask[j, i] = True
    g = repair_dangling(WebGraph.from_edges(n, list(zip(*np.nonzero(mask)))))
    return g, Grouping(labels)


def bounded_web(rng, n, delta, p_in=1.0):
    """Dense clusters whose pages have at most ``delta`` external outlinks,
    plus loosely linked single pages.

    Returns the graph and a coarse grouping in which the single pages share
    one extra group, so regrouping has to detach most of them.
    """
    k_min = int(np.ceil(1.0 / delta)) + 2
    labels = np.full(n, -1)
    start, c = 0, 0
    while n - start >= k_min + 1:
        k = int(rng.integers(k_min, max(k_min + 1, (n - start) * 0.9)))
        labels[start:start + k] = c
        start += k
        c += 1
    singles = np.flatnonzero(labels < 0)
    labels[singles] = c + np.arange(singles.size)
    same = labels[:, None] == labels[None, :]
    mask = same & (rng.random((n, n)) < p_in)
    np.fill_diagonal(mask, False)
    for i in range(n):
        members = np.flatnonzero(same[i])
        if members.size > 1 and not mask[i].any():
            mask[i, members[members != i][0]] = True
        out_int = int(mask[i].sum())
        if members.size == 1:
            targets = rng.choice(np.delete(np.arange(n), i), size=int(rng.integers(1, 4)),
                                 replace=False)
            mask[i, targets] = True
        elif out_int >= 1.0 / delta and (~same[i]).any() and rng.random() < 0.5:
            mask[i, rng.choice(np.flatnonzero(~same[i]))] = True
    perm = rng.permutation(n)
    inv = np.argsort(perm)
    edges = [(int(inv[a]), int(inv[b])) for a, b in zip(*np.nonzero(mask))]
    g = repair_dangling(WebGraph.from_edges(n, edges))
    coarse = labels.copy()
    coarse[singles] = c
    return g, Grouping(coarse[perm])


@pytest.fixture(scope="session")
def six_page():
    return read_edge_list(fixture_path("six_page.txt"))


@pytest.fixture(scope="session")
def six_page_dangling():
    return read_edge_list(fixture_path("six_page_dangling.txt"))


@pytest.fixture(scope="session")
def A6(six_page):
    return hyperlink_matrix(six_page)


@pytest.fixture(scope="session")
def x_star6(A6):
    return dense_pagerank(A6.toarray())


@pytest.fixture(scope="session")
def groups6():
    return read_grouping(fixture_path("six_groups.txt"), 6)


ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
