import math

import numpy as np
import pytest

from lsnet.model import (
    AdjacencyMatrix,
    CovariateMatrix,
    ParameterSet,
    assemble_theta,
    center_cols,
    double_center,
    gradients,
    logit,
    neg_log_likelihood,
    sigmoid,
    softplus,
)


def random_instance(rng, n, k, with_x=True):
    p = rng.random((n, n)) * 0.8 + 0.1
    a = (np.triu(rng.random((n, n)), 1) < np.triu(p, 1)).astype(float)
    A = AdjacencyMatrix(a + a.T)
    if with_x:
        x = rng.normal(size=(n, n))
        x = (x + x.T) / 2
        np.fill_diagonal(x, 0.0)
        X = CovariateMatrix(x)
    else:
        X = CovariateMatrix.none(n)
    params = ParameterSet(rng.normal(size=(n, k)), rng.normal(size=n) * 0.3, rng.normal() * 0.5)
    return A, X, params


def naive_nll(A_entries, theta):
    # independent double-loop oracle, all (i, j) pairs including the diagonal
    n = theta.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            t = theta[i, j]
            total -= A_entries[i, j] * t + math.log(1.0 - 1.0 / (1.0 + math.exp(-t)))
    return total


class TestTypes:
    def test_adjacency_rejects_asymmetry(self):
        with pytest.raises(ValueError, match="symmetric"):
            AdjacencyMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_adjacency_rejects_self_loops(self):
        with pytest.raises(ValueError, match="diagonal"):
            AdjacencyMatrix(np.eye(3))

    def test_adjacency_rejects_nonbinary(self):
        m = np.array([[0.0, 0.5], [0.5, 0.0]])
        with pytest.raises(ValueError, match="0 or 1"):
            AdjacencyMatrix(m)

    def test_covariate_absent_flag(self):
        X = CovariateMatrix.none(4)
        assert X.absent and np.all(X.entries == 0.0) and X.n == 4

    def test_covariate_rejects_diagonal(self):
        m = np.eye(3)
        with pytest.raises(ValueError, match="diagonal"):
            CovariateMatrix(m)

    def test_parameterset_dimension_check(self):
        with pytest.raises(ValueError, match="alpha"):
            ParameterSet(np.zeros((3, 2)), np.zeros(4))


class TestAssembleTheta:
    def test_zero_case(self):
        params = ParameterSet(np.zeros((3, 2)), np.zeros(3), 0.0)
        theta = assemble_theta(params, CovariateMatrix.none(3))
        assert np.all(theta == 0.0)

    def test_hand_case(self):
        # n=2, k=1: Z = [[1], [-1]], alpha = (0.5, 0.5), beta = 0
        params = ParameterSet(np.array([[1.0], [-1.0]]), np.array([0.5, 0.5]), 0.0)
        theta = assemble_theta(params, CovariateMatrix.none(2))
        assert np.allclose(theta, [[2.0, 0.0], [0.0, 2.0]], atol=1e-15)

    def test_symmetry_random(self):
        rng = np.random.default_rng(0)
        _, X, params = random_instance(rng, 6, 2)
        theta = assemble_theta(params, X)
        assert np.abs(theta - theta.T).max() < 1e-14

    def test_dimension_mismatch(self):
        params = ParameterSet(np.zeros((3, 2)), np.zeros(3))
        with pytest.raises(ValueError, match="size"):
            assemble_theta(params, CovariateMatrix.none(4))


class TestSigmoidLogit:
    def test_sigmoid_symmetry_point(self):
        assert sigmoid(0.0) == 0.5

    def test_logit_at_half(self):
        assert logit(0.5) == 0.0

    def test_inverse_composition(self):
        assert abs(sigmoid(logit(0.3)) - 0.3) < 1e-12

    def test_logit_domain_errors(self):
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                logit(bad)

    def test_elementwise_on_matrix(self):
        theta = np.array([[0.0, 2.0], [-2.0, 30.0]])
        out = sigmoid(theta)
        assert out.shape == theta.shape
        assert np.allclose(out, 1.0 / (1.0 + np.exp(-theta)))

    def test_sigmoid_extreme_arguments(self):
        assert sigmoid(-800.0) == 0.0 and sigmoid(800.0) == 1.0

    def test_softplus_stable(self):
        assert softplus(800.0) == 800.0
        assert softplus(-800.0) == 0.0
        assert abs(softplus(0.0) - math.log(2.0)) < 1e-15


class TestNegLogLikelihood:
    def test_empty_graph_zero_theta(self):
        A = AdjacencyMatrix(np.zeros((2, 2)))
        h = neg_log_likelihood(A, np.zeros((2, 2)))
        assert abs(h - 4.0 * math.log(2.0)) < 1e-12

    def test_zero_theta_any_graph(self):
        rng = np.random.default_rng(1)
        for n in (3, 5, 8):
            A, _, _ = random_instance(rng, n, 2)
            h = neg_log_likelihood(A, np.zeros((n, n)))
            assert abs(h - n * n * math.log(2.0)) < 1e-10

    def test_matches_naive_loop(self):
        rng = np.random.default_rng(2)
        A, X, params = random_instance(rng, 5, 2)
        theta = assemble_theta(params, X)
        h = neg_log_likelihood(A, theta)
        ref = naive_nll(A.entries, theta)
        assert abs(h - ref) <= 1e-12 * max(1.0, abs(ref))

    def test_finite_for_extreme_theta(self):
        A = AdjacencyMatrix(np.zeros((2, 2)))
        theta = np.array([[1000.0, -1000.0], [-1000.0, 1000.0]])
        assert np.isfinite(neg_log_likelihood(A, theta))

    def test_shape_mismatch(self):
        A = AdjacencyMatrix(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            neg_log_likelihood(A, np.zeros((3, 3)))


def finite_diff_gradients(A, X, params, h=1e-5):
    def f(z, a, b):
        return neg_log_likelihood(A, assemble_theta(ParameterSet(z, a, b), X))

    Z, alpha, beta = params.Z, params.alpha, params.beta
    gz = np.zeros_like(Z)
    for i in range(Z.shape[0]):
        for j in range(Z.shape[1]):
            zp, zm = Z.copy(), Z.copy()
            zp[i, j] += h
            zm[i, j] -= h
            gz[i, j] = (f(zp, alpha, beta) - f(zm, alpha, beta)) / (2 * h)
    ga = np.zeros_like(alpha)
    for i in range(alpha.shape[0]):
        ap, am = alpha.copy(), alpha.copy()
        ap[i] += h
        am[i] -= h
        ga[i] = (f(Z, ap, beta) - f(Z, am, beta)) / (2 * h)
    gb = (f(Z, alpha, beta + h) - f(Z, alpha, beta - h)) / (2 * h)
    return gz, ga, gb


class TestGradients:
    def test_stationary_point(self):
        # A := sigmoid(Theta) entrywise (binariness relaxed) makes the residual zero
        rng = np.random.default_rng(3)
        _, X, params = random_instance(rng, 6, 2)
        theta = assemble_theta(params, X)
        a_relaxed = sigmoid(theta)
        gz, ga, gb = gradients(a_relaxed, X, params)
        assert np.abs(gz).max() < 1e-10
        assert np.abs(ga).max() < 1e-10
        assert abs(gb) < 1e-10

    @pytest.mark.parametrize("seed", range(5))
    def test_finite_difference_oracle(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(4, 8))
        k = int(rng.integers(1, 4))
        A, X, params = random_instance(rng, n, k)
        gz, ga, gb = gradients(A, X, params)
        fz, fa, fb = finite_diff_gradients(A, X, params)
        np.testing.assert_allclose(gz, fz, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(ga, fa, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(gb, fb, rtol=1e-6, atol=1e-8)

    def test_absent_covariate_beta_inactive(self):
        rng = np.random.default_rng(4)
        A, X, params = random_instance(rng, 5, 2, with_x=False)
        assert X.absent
        _, _, gb = gradients(A, X, params)
        assert gb == 0.0

    def test_local_descent_after_small_step(self):
        rng = np.random.default_rng(5)
        A, X, params = random_instance(rng, 8, 2)
        h0 = neg_log_likelihood(A, assemble_theta(params, X))
        gz, ga, gb = gradients(A, X, params)
        eta = 1e-4
        stepped = ParameterSet(params.Z - eta * gz, params.alpha - eta * ga, params.beta - eta * gb)
        h1 = neg_log_likelihood(A, assemble_theta(stepped, X))
        assert h1 <= h0 + 1e-8


class TestCentering:
    def test_center_cols(self):
        rng = np.random.default_rng(6)
        z = rng.normal(size=(7, 3))
        c = center_cols(z)
        assert np.abs(c.sum(axis=0)).max() < 1e-12

    def test_double_center_matches_jmj(self):
        rng = np.random.default_rng(7)
        m = rng.normal(size=(6, 6))
        n = 6
        J = np.eye(n) - np.ones((n, n)) / n
        assert np.allclose(double_center(m), J @ m @ J, atol=1e-12)
