"""Tests for the simplex-QP machinery and the model prox solver."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxbundle.model import Bundle, BundleElement
from proxbundle.qp import (QPConvergenceError, dist_to_hull,
                           minimize_simplex_qp, project_simplex,
                           prox_of_model)


def make_bundle(planes, z, r=1.0):
    elements = [BundleElement(i, np.asarray(site, float), float(val),
                              np.asarray(g, float))
                for i, (site, val, g) in enumerate(planes)]
    return Bundle(elements, np.asarray(z, float), r)


class TestProjectSimplex:
    def test_already_on_simplex_unchanged(self):
        v = np.array([0.2, 0.3, 0.5])
        np.testing.assert_allclose(project_simplex(v), v, atol=1e-15)

    def test_projects_to_vertex(self):
        out = project_simplex(np.array([10.0, 0.0, -3.0]))
        np.testing.assert_allclose(out, [1.0, 0.0, 0.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            project_simplex(np.array([np.nan, 0.0]))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            project_simplex(np.array([]))

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=12))
    def test_output_feasible_and_optimal(self, vals):
        v = np.array(vals)
        out = project_simplex(v)
        assert abs(out.sum() - 1.0) < 1e-12
        assert out.min() >= 0.0
        # optimality: no feasible direction improves the distance
        rng = np.random.default_rng(0)
        for _ in range(20):
            other = project_simplex(rng.normal(size=v.size) * 10)
            assert (np.linalg.norm(out - v)
                    <= np.linalg.norm(other - v) + 1e-10)


class TestMinimizeSimplexQP:
    def test_single_variable(self):
        lam, resid = minimize_simplex_qp(np.array([[2.0]]), np.array([1.0]))
        np.testing.assert_allclose(lam, [1.0])
        assert resid == 0.0

    def test_zero_matrix_picks_smallest_linear_term(self):
        lam, _ = minimize_simplex_qp(np.zeros((3, 3)),
                                     np.array([2.0, -1.0, 0.5]))
        np.testing.assert_allclose(lam, [0.0, 1.0, 0.0])

    def test_interior_optimum(self):
        # min 0.5(l1^2 + l2^2) on the simplex -> (0.5, 0.5)
        lam, _ = minimize_simplex_qp(np.eye(2), np.zeros(2))
        np.testing.assert_allclose(lam, [0.5, 0.5], atol=1e-10)

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            m = rng.integers(2, 5)
            B = rng.normal(size=(m, m))
            Q = B @ B.T
            q = rng.normal(size=m)
            lam, _ = minimize_simplex_qp(Q, q, tol=1e-12)
            obj = 0.5 * lam @ Q @ lam + q @ lam
            best = min(
                0.5 * w @ Q @ w + q @ w
                for w in _brute_force_candidates(Q, q))
            assert obj <= best + 1e-8

    def test_warm_start_agrees_with_cold_start(self):
        rng = np.random.default_rng(3)
        B = rng.normal(size=(4, 4))
        Q = B @ B.T
        q = rng.normal(size=4)
        cold, _ = minimize_simplex_qp(Q, q)
        warm, _ = minimize_simplex_qp(Q, q, lam0=np.array([0.7, 0.1, 0.1, 0.1]))
        obj = lambda lam: 0.5 * lam @ Q @ lam + q @ lam
        assert abs(obj(cold) - obj(warm)) < 1e-9

    def test_raises_when_unreachable(self):
        # an ill-conditioned instance with an interior optimum cannot reach
        # a 1e-30 residual in double precision, so the cap must trip
        B = np.array([[1e4, 1.0], [1e4, -1.0], [9999.0, 0.5]])
        Q = B @ B.T
        q = 1.0 - Q @ np.array([0.3, 0.3, 0.4])
        with pytest.raises(QPConvergenceError):
            minimize_simplex_qp(Q, q, tol=1e-30, max_iter=200)


def _brute_force_candidates(Q, q):
    """Exhaustive face enumeration for small simplex QPs."""
    m = q.size
    for k in range(1, m + 1):
        for face in itertools.combinations(range(m), k):
            face = list(face)
            lam0 = np.zeros(len(face))
            lam0[:] = 1.0 / len(face)
            if len(face) == 1:
                w = np.zeros(m)
                w[face[0]] = 1.0
                yield w
                continue
            N = np.zeros((len(face), len(face) - 1))
            idx = np.arange(len(face) - 1)
            N[idx, idx] = 1.0
            N[idx + 1, idx] = -1.0
            Qf = Q[np.ix_(face, face)]
            H = N.T @ Qf @ N
            g = N.T @ (Qf @ lam0 + q[face])
            y, *_ = np.linalg.lstsq(H, -g, rcond=None)
            lf = lam0 + N @ y
            if lf.min() < -1e-9:
                continue
            w = np.zeros(m)
            w[face] = np.maximum(lf, 0.0)
            w /= w.sum()
            yield w


class TestProxOfModel:
    def test_single_affine_plane(self):
        # prox of an affine function steps straight down the gradient
        z = np.array([1.0, -2.0])
        g = np.array([3.0, 4.0])
        bundle = make_bundle([(z, 5.0, g)], z, r=2.0)
        x_next, lam, kkt = prox_of_model(bundle)
        np.testing.assert_allclose(x_next, z - g / 2.0)
        np.testing.assert_allclose(lam, [1.0])

    def test_absolute_value_prox_at_zero(self):
        # planes of |x| built at +-1: model is |x| itself, prox at 0 is 0
        z = np.array([0.0])
        bundle = make_bundle([(np.array([1.0]), 1.0, np.array([1.0])),
                              (np.array([-1.0]), 1.0, np.array([-1.0]))], z)
        x_next, lam, _ = prox_of_model(bundle)
        np.testing.assert_allclose(x_next, [0.0], atol=1e-12)
        np.testing.assert_allclose(lam, [0.5, 0.5], atol=1e-10)

    @pytest.mark.parametrize("z0", [-3.0, -0.5, 0.0, 0.5, 3.0])
    def test_absolute_value_prox_matches_soft_threshold(self, z0):
        z = np.array([z0])
        bundle = make_bundle([(np.array([1.0]), 1.0, np.array([1.0])),
                              (np.array([-1.0]), 1.0, np.array([-1.0]))], z)
        x_next, _, _ = prox_of_model(bundle)
        expected = np.sign(z0) * max(abs(z0) - 1.0, 0.0)
        np.testing.assert_allclose(x_next, [expected], atol=1e-8)

    def test_lambda_on_simplex(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n, m = 2, rng.integers(1, 4)
            z = rng.normal(size=n)
            planes = [(rng.normal(size=n), rng.normal(), rng.normal(size=n))
                      for _ in range(m)]
            bundle = make_bundle(planes, z)
            _, lam, _ = prox_of_model(bundle)
            assert abs(lam.sum() - 1.0) <= 1e-14
            assert lam.min() >= -1e-14

    def test_recombination_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 7))
            r = float(rng.uniform(0.5, 3.0))
            z = rng.normal(size=n)
            planes = [(rng.normal(size=n), rng.normal(), rng.normal(size=n))
                      for _ in range(m)]
            bundle = make_bundle(planes, z, r)
            x_next, lam, _ = prox_of_model(bundle)
            G = bundle.subgrads.T
            lhs = r * (z - x_next)
            rhs = G @ lam
            scale = 1.0 + np.linalg.norm(rhs)
            assert np.linalg.norm(lhs - rhs) <= 1e-12 * scale

    def test_matches_brute_force_small_bundles(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(1, 3))
            m = int(rng.integers(1, 4))
            r = float(rng.uniform(0.5, 2.0))
            z = rng.normal(size=n)
            planes = [(rng.normal(size=n), rng.normal(), rng.normal(size=n))
                      for _ in range(m)]
            bundle = make_bundle(planes, z, r)
            x_next, _, _ = prox_of_model(bundle)

            def primal(x):
                vals = [val + g @ (x - site) for site, val, g in planes]
                return max(vals) + 0.5 * r * np.dot(x - z, x - z)

            # dual face enumeration gives the exact primal minimizer
            G = bundle.subgrads.T
            e = bundle.plane_values(z)
            best = None
            for w in _brute_force_candidates(G.T @ G / r, -e):
                x = z - (G @ w) / r
                if best is None or primal(x) < primal(best):
                    best = x
            assert primal(x_next) <= primal(best) + 1e-8

    def test_all_zero_subgradients(self):
        z = np.array([1.0, 2.0])
        bundle = make_bundle([(z, 3.0, np.zeros(2)),
                              (z + 1.0, 7.0, np.zeros(2))], z)
        x_next, lam, kkt = prox_of_model(bundle)
        np.testing.assert_array_equal(x_next, z)
        # the plane with the larger value at z carries all the weight
        np.testing.assert_allclose(lam, [0.0, 1.0])
        assert kkt == 0.0


class TestDistToHull:
    def test_member_is_zero(self):
        g = np.array([1.0, 2.0])
        assert dist_to_hull(g, [g, np.array([0.0, 0.0])]) == 0.0

    def test_singleton(self):
        d = dist_to_hull(np.array([3.0, 4.0]), [np.array([0.0, 0.0])])
        assert abs(d - 5.0) < 1e-12

    def test_projection_onto_segment(self):
        # hull of (0,0) and (2,0); point (1,1) projects to (1,0)
        d = dist_to_hull(np.array([1.0, 1.0]),
                         [np.array([0.0, 0.0]), np.array([2.0, 0.0])])
        assert abs(d - 1.0) < 1e-8

    def test_interior_point_is_zero(self):
        vs = [np.array([0.0, 0.0]), np.array([1.0, 0.0]),
              np.array([0.0, 1.0])]
        d = dist_to_hull(np.array([0.25, 0.25]), vs)
        assert d < 1e-7

    def test_accepts_matrix_input(self):
        V = np.array([[0.0, 0.0], [2.0, 0.0]])
        assert abs(dist_to_hull(np.array([3.0, 0.0]), V) - 1.0) < 1e-8

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            dist_to_hull(np.array([1.0]), np.empty((0, 1)))
