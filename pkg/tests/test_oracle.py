import math

import numpy as np
import pytest

from ttdra.errors import TooLargeForOracle
from ttdra.instance import QapInstance, random_instance
from ttdra.oracle import brute_force, materialize_W, qp_project_oracle
from ttdra.quadratic import evaluate_permutation, objective_vec
from ttdra.solver import solve


def test_brute_force_single_facility():
    res = brute_force(QapInstance([[3.0]], [[4.0]], [2.0]))
    assert res.optimum == 14.0 and res.argmin.tolist() == [0] and res.enumerated == 1


def test_brute_force_two_by_two():
    res = brute_force(QapInstance([[0, 1], [1, 0]], [[0, 2], [2, 0]]))
    assert res.optimum == 4.0 and res.worst == 4.0
    assert res.argmin.tolist() == [0, 1]
    assert res.enumerated == 2


def test_brute_force_matches_definition(rng):
    for n in range(1, 7):
        inst = random_instance(n, rng, symmetric=False, linear=True)
        res = brute_force(inst)
        assert res.enumerated == math.factorial(n)
        assert evaluate_permutation(inst, res.argmin) == res.optimum
        assert res.optimum <= res.worst


def test_brute_force_first_attaining_argmin():
    # every permutation costs the same, so the lexicographically first wins
    res = brute_force(QapInstance(np.ones((4, 4)), np.ones((4, 4))))
    assert res.argmin.tolist() == [0, 1, 2, 3]


def test_brute_force_bounds_ttdra_on_seven_facilities():
    for seed in range(20):
        inst = random_instance(7, np.random.default_rng(seed))
        assert brute_force(inst).optimum <= solve(inst).objective


def test_relabeling_invariance(rng):
    for _ in range(10):
        n = int(rng.integers(2, 7))
        inst = random_instance(n, rng, symmetric=False)
        rho = rng.permutation(n)
        relabeled = QapInstance(inst.flow[np.ix_(rho, rho)], inst.distance)
        assert brute_force(relabeled).optimum == brute_force(inst).optimum


def test_size_caps(rng):
    with pytest.raises(TooLargeForOracle):
        brute_force(random_instance(11, rng))
    with pytest.raises(TooLargeForOracle):
        materialize_W(random_instance(9, rng))
    with pytest.raises(TooLargeForOracle):
        qp_project_oracle(np.zeros((5, 5)))


def test_materialize_identity():
    assert np.array_equal(materialize_W(QapInstance(np.eye(2), np.eye(2))), np.eye(4))


def test_materialize_block_structure(rng):
    A, B = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    W = materialize_W(QapInstance(A, B))
    for j in range(2):
        for k in range(2):
            assert np.array_equal(W[2 * j:2 * j + 2, 2 * k:2 * k + 2], B[j, k] * A)


def test_materialize_quadratic_form(rng):
    inst = QapInstance(rng.standard_normal((3, 3)), rng.standard_normal((3, 3)))
    x = rng.standard_normal(9)
    q = x @ materialize_W(inst) @ x
    assert q == pytest.approx(objective_vec(inst, x), rel=1e-12)


def test_qp_oracle_examples(rng):
    J = np.full((3, 3), 1 / 3)
    assert np.allclose(qp_project_oracle(J), J, atol=1e-14)
    D = 0.5 * np.eye(4) + 0.5 * np.eye(4)[[1, 0, 3, 2]]
    assert np.allclose(qp_project_oracle(D), D, atol=1e-14)
    assert np.allclose(qp_project_oracle(np.zeros((2, 2))), np.full((2, 2), 0.5), atol=1e-14)
    assert np.allclose(qp_project_oracle(np.array([[2.0, -1.0], [-1.0, 2.0]])), np.eye(2), atol=1e-12)


def test_qp_oracle_beats_random_feasible_points(rng):
    # The returned point must be at least as close as any sampled doubly stochastic matrix.
    for _ in range(20):
        n = int(rng.integers(2, 5))
        X = rng.standard_normal((n, n))
        Y = qp_project_oracle(X)
        assert Y.min() >= 0
        assert np.allclose(Y.sum(0), 1, atol=1e-12) and np.allclose(Y.sum(1), 1, atol=1e-12)
        d = np.linalg.norm(X - Y)
        for _ in range(50):
            w = rng.dirichlet(np.ones(math.factorial(n) if n < 4 else 24))
            perms = [rng.permutation(n) for _ in w]
            Z = sum(wi * np.eye(n)[p] for wi, p in zip(w, perms))
            assert d <= np.linalg.norm(X - Z) + 1e-12
