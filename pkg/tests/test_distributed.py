import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import dense_pagerank, random_web
from distpagerank.distributed import (SIMULTANEOUS, apply_distributed,
                                      average_link_matrix, distributed_link_matrix,
                                      gossip_damping, gossip_run, gossip_trials, m_hat,
                                      mse_estimate)
from distpagerank.exceptions import ValidationError
from distpagerank.graph import hyperlink_matrix

h, t = 1 / 2, 1 / 3
# Reference gossip link matrices of the six-page web, as (column i, its entries).
REF_COLUMNS = {
    0: {1: h, 3: h},
    1: {0: h, 2: h},
    2: {1: t, 3: t, 5: t},
    3: {2: t, 4: t, 5: t},
    4: {5: 1.0},
    5: {3: h, 4: h},
}


def reference_A(i):
    M = np.eye(6)
    M[:, i] = 0
    for r, v in REF_COLUMNS[i].items():
        M[r, i] = v
    return M


@pytest.mark.parametrize("i", range(6))
def test_link_matrices_match_reference(A6, i):
    Ai = distributed_link_matrix(A6, i)
    np.testing.assert_array_equal(Ai.toarray(), reference_A(i))
    assert Ai.nnz <= 2 * 6 - 1


def rule_oracle(A, i):
    """The three construction rules, entry by entry."""
    n = A.shape[0]
    out = np.zeros((n, n))
    for r in range(n):
        for c in range(n):
            if c == i:
                out[r, c] = A[r, c]
            elif r == c:
                out[r, c] = 1.0
    return out


def row_column_oracle(A, i):
    """Row-and-column variant: row i and column i of A, diagonal fills rows."""
    n = A.shape[0]
    out = np.zeros((n, n))
    out[i, :] = A[i, :]
    out[:, i] = A[:, i]
    for j in range(n):
        if j != i:
            out[j, j] = 1.0 - A[i, j]
    return out


@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_link_matrices_follow_rules(n, seed):
    A = hyperlink_matrix(random_web(np.random.default_rng(seed), n))
    dense = A.toarray()
    total = np.zeros((n, n))
    x = np.random.default_rng(seed).dirichlet(np.ones(n))
    for i in range(n):
        Ai = distributed_link_matrix(A, i)
        np.testing.assert_array_equal(Ai.toarray(), rule_oracle(dense, i))
        np.testing.assert_allclose(Ai.toarray().sum(axis=0), 1.0, atol=1e-15)
        np.testing.assert_allclose(Ai @ x, Ai.toarray() @ x, atol=1e-15)
        total += Ai.toarray()
    np.testing.assert_allclose(total / n, average_link_matrix(A).toarray(), atol=1e-14)
    np.testing.assert_allclose(total / n, dense / n + (n - 1) / n * np.eye(n), atol=1e-14)


@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_reference_average_holds_for_row_column_family(n, seed):
    dense = hyperlink_matrix(random_web(np.random.default_rng(seed), n)).toarray()
    avg = sum(row_column_oracle(dense, i) for i in range(n)) / n
    np.testing.assert_allclose(avg, 2 / n * dense + (n - 2) / n * np.eye(n), atol=1e-14)


def test_m_hat_formula():
    for n in (2, 6, 100):
        assert m_hat(0.15, n) == pytest.approx(0.3 / (0.85 * n + 0.3), rel=1e-14)
    with pytest.raises(ValidationError):
        m_hat(0.15, 1)


@given(st.integers(2, 40), st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
def test_gossip_damping_fixes_pagerank(n, seed, m):
    A = hyperlink_matrix(random_web(np.random.default_rng(seed), n))
    x_star = dense_pagerank(A.toarray(), m)
    avg = average_link_matrix(A).toarray()
    d = gossip_damping(m, n)
    assert d == pytest.approx(m / (n - m * (n - 1)), rel=1e-12)
    np.testing.assert_allclose((1 - d) * avg @ x_star + d / n, x_star, atol=1e-13)
    # simultaneous firing with probability p: expected matrix p A + (1 - p) I
    p = 0.2
    dp = gossip_damping(m, n, p)
    Ep = p * A.toarray() + (1 - p) * np.eye(n)
    np.testing.assert_allclose((1 - dp) * Ep @ x_star + dp / n, x_star, atol=1e-13)


def test_reference_m_hat_biases_column_gossip(A6, x_star6):
    d = m_hat(0.15, 6)
    avg = average_link_matrix(A6).toarray()
    fixed = np.linalg.solve(np.eye(6) - (1 - d) * avg, np.full(6, d / 6))
    np.testing.assert_allclose(fixed, dense_pagerank(A6.toarray(), 0.3 / 1.15), atol=1e-12)
    assert np.abs(fixed - x_star6).sum() > 0.05


def test_apply_distributed(A6):
    x = np.full(6, 1 / 6)
    y = apply_distributed(A6, 2, 0.1, x)
    np.testing.assert_allclose(y, 0.9 * reference_A(2) @ x + 0.1 / 6, atol=1e-15)
    assert y.sum() == pytest.approx(1.0)


def test_gossip_converges(A6, x_star6):
    traces = gossip_trials(A6, 0.15, range(20), 100_000, x_star=x_star6)
    l1 = np.stack([t.l1_error for t in traces])
    assert l1[:, -1].mean() < 0.05
    assert l1[:, -1].mean() < l1[:, 1].mean() / 5
    for tr in traces:
        np.testing.assert_allclose(tr.states.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(tr.states >= 0)


def test_states_oscillate_while_average_settles(A6, x_star6):
    tr = gossip_run(A6, 0.15, 3, 50_000, x_star=x_star6)
    state_err = np.abs(tr.states[-50:] - x_star6).sum(axis=1)
    assert state_err.min() > 0.05
    assert tr.l1_error[-1] < 0.05


def test_batch_equals_single(A6):
    batch = gossip_trials(A6, 0.15, [5, 6, 7], 9000, checkpoint_every=500)
    for tr in batch:
        single = gossip_run(A6, 0.15, tr.seed, 9000, checkpoint_every=500)
        np.testing.assert_array_equal(single.averages, tr.averages)
        np.testing.assert_array_equal(single.states, tr.states)


def test_simultaneous_mode(A6, x_star6):
    tr = gossip_run(A6, 0.15, 11, 20_000, mode=SIMULTANEOUS, p=0.2, x_star=x_star6)
    assert tr.l1_error[-1] < 0.05
    again = gossip_trials(A6, 0.15, [11, 12], 20_000, mode=SIMULTANEOUS, p=0.2)[0]
    np.testing.assert_array_equal(again.averages, tr.averages)
    with pytest.raises(ValidationError):
        gossip_run(A6, 0.15, 1, 10, mode=SIMULTANEOUS)


def test_simultaneous_step_matches_dense(A6):
    # with p = 1 every page fires: x <- (1 - d) A x + d / n exactly
    d = 0.2
    tr = gossip_run(A6, 0.15, 0, 3, mode=SIMULTANEOUS, p=1.0, damping=d, checkpoint_every=1)
    x = np.full(6, 1 / 6)
    for k in range(1, 4):
        x = (1 - d) * A6.toarray() @ x + d / 6
        np.testing.assert_allclose(tr.states[k], x, atol=1e-15)


def test_single_step_matches_dense(A6):
    tr = gossip_run(A6, 0.15, 42, 5, checkpoint_every=1)
    d = gossip_damping(0.15, 6)
    for k in range(5):
        x, y = tr.states[k], tr.states[k + 1]
        candidates = [(1 - d) * reference_A(i) @ x + d / 6 for i in range(6)]
        assert min(np.abs(c - y).max() for c in candidates) < 1e-15
    np.testing.assert_allclose(tr.averages[-1], tr.states.mean(axis=0), atol=1e-15)


def test_checkpoints_and_zero_steps(A6):
    tr = gossip_run(A6, 0.15, 1, 250, checkpoint_every=100)
    assert tr.steps.tolist() == [0, 100, 200, 250]
    tr0 = gossip_run(A6, 0.15, 1, 0)
    assert tr0.steps.tolist() == [0]


def test_mse_estimate(A6, x_star6):
    est = mse_estimate(A6, 0.15, 4, 20_000, x_star=x_star6)
    assert est.mean[-1] < est.mean[0]
    assert np.all(est.minimum <= est.mean) and np.all(est.mean <= est.maximum)
    with pytest.raises(ValidationError):
        mse_estimate(A6, 0.15, 2, 10, seeds=[1])
