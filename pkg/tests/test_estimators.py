import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netmcse import oracle
from netmcse.estimators import (
    EstimateState,
    SingularPivot,
    delta_covariance,
    delta_jacobian,
    g_transform,
    mh_mean,
    srw_ratio_mean,
)
from netmcse.features import FeatureSpec, feature_table
from netmcse.graph_core import from_edges, generate_er, largest_connected_component
from netmcse.mcse import batch_means_covariance
from netmcse.walkers import make_rng, run_walk

from conftest import TINY


class TestMHMean:
    def test_constant(self):
        assert mh_mean(np.tile([2.0, 1.0], (50, 1))).tolist() == [2.0, 1.0]

    def test_two_rows(self):
        assert mh_mean([[1, 0], [3, 1]]).tolist() == [2.0, 0.5]

    def test_empty(self):
        with pytest.raises(ValueError):
            mh_mean(np.empty((0, 2)))

    def test_path_graph_degree(self, p3):
        spec = FeatureSpec.parse("degree")
        trace, _ = run_walk(p3, "mh", 0, 1_000_000, feature_table(spec, p3), make_rng(21))
        assert abs(mh_mean(trace.features)[0] - 4 / 3) < 0.01


class TestRatioMean:
    def test_regular_graph_weights_cancel(self, k3):
        spec = FeatureSpec.parse("degree,cc")
        trace, _ = run_walk(k3, "srw", 0, 777, feature_table(spec, k3), make_rng(1))
        assert np.allclose(srw_ratio_mean(trace.features, trace.degrees), mh_mean(trace.features), rtol=1e-15)

    def test_single_step(self):
        assert srw_ratio_mean([[2.0, 1.0]], [2]).tolist() == [2.0, 1.0]

    def test_path_graph_degree(self, p3):
        spec = FeatureSpec.parse("degree")
        trace, _ = run_walk(p3, "srw", 0, 1_000_000, feature_table(spec, p3), make_rng(22))
        assert abs(srw_ratio_mean(trace.features, trace.degrees)[0] - 4 / 3) < 0.01
        # the uncorrected mean is degree biased toward 1.5
        assert abs(mh_mean(trace.features)[0] - 1.5) < 0.01

    def test_bad_degrees(self):
        with pytest.raises(ValueError):
            srw_ratio_mean([[1.0]], [0])

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 30), st.floats(0, 1), st.floats(-5, 5)), min_size=1, max_size=200))
    def test_ratio_equals_g_of_h_star_mean(self, rows):
        d = np.array([r[0] for r in rows], dtype=float)
        h = np.array([[r[0], r[1], r[2]] for r in rows])
        h_star = np.column_stack([1.0 / d, h[:, 1] / d, h[:, 2] / d])
        lhs = srw_ratio_mean(h, d)
        rhs = g_transform(mh_mean(h_star))
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(h).max())

    @pytest.mark.parametrize("name", sorted(TINY))
    def test_srw_consistency_exact(self, name):
        """Weighted by the SRW stationary law, E[h/d] / E[1/d] is the uniform mean."""
        g = from_edges(TINY[name])
        spec = FeatureSpec.parse("degree,deg=2,cc")
        lam = oracle.srw_stationary(g)
        h = feature_table(spec, g)
        d = g.degrees.astype(float)
        ratio = (lam @ (h / d[:, None])) / (lam @ (1.0 / d))
        assert np.allclose(ratio, oracle.exact_means(g, spec), rtol=1e-14)


class TestDelta:
    def test_leading_one(self):
        G = delta_jacobian([1.0, 0.2, 0.3, 0.4])
        assert G[0].tolist() == [-1.0, -0.2, -0.3, -0.4]
        assert np.array_equal(G[1:, 1:], np.eye(3))
        assert np.all(G[1:, 0] == 0)

    def test_p2(self):
        assert delta_jacobian([0.5, 0.25]).tolist() == [[-4.0, -1.0], [0.0, 2.0]]

    def test_scalar(self):
        assert delta_jacobian([0.25]).tolist() == [[-16.0]]

    def test_p4_display(self):
        a, b, c, d = 0.4, 0.1, 0.05, 0.2
        expect = np.array([[-1 / a**2, -b / a**2, -c / a**2, -d / a**2],
                           [0, 1 / a, 0, 0],
                           [0, 0, 1 / a, 0],
                           [0, 0, 0, 1 / a]])
        assert np.allclose(delta_jacobian([a, b, c, d]), expect, rtol=1e-15)

    def test_jacobian_matches_finite_difference(self):
        mu = np.array([0.3, 0.7, -0.2])
        G = delta_jacobian(mu)
        step = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            fd = (g_transform(mu + e) - g_transform(mu - e)) / (2 * step)
            assert np.allclose(G[i], fd, rtol=1e-6, atol=1e-8)

    def test_singular_pivot(self):
        with pytest.raises(SingularPivot):
            delta_jacobian([0.0, 1.0])
        with pytest.raises(SingularPivot):
            g_transform([0.0])

    def test_identity_and_scalar_covariance(self):
        S = np.array([[2.0, 0.5], [0.5, 1.0]])
        assert np.array_equal(delta_covariance(np.eye(2), S), S)
        assert delta_covariance([[-4.0]], [[2.0]]).tolist() == [[32.0]]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            delta_covariance(np.eye(2), np.eye(3))

    def test_determinant_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            G = rng.standard_normal((4, 4))
            A = rng.standard_normal((4, 4))
            S = A @ A.T + 0.1 * np.eye(4)
            lhs = np.linalg.det(delta_covariance(G, S))
            rhs = np.linalg.det(G) ** 2 * np.linalg.det(S)
            assert lhs == pytest.approx(rhs, rel=1e-10)


class TestEstimateState:
    def test_streaming_matches_fsum(self):
        rng = np.random.default_rng(0)
        rows = rng.standard_normal((100_000, 3)) * 1e3 + 1e6
        st_ = EstimateState(3)
        for block in np.array_split(rows, 37):
            st_.update(block)
        assert st_.m == len(rows)
        expect = np.array([math.fsum(c) for c in rows.T]) / len(rows)
        assert np.allclose(st_.mean(), expect, rtol=1e-14)

    def test_empty(self):
        with pytest.raises(ValueError):
            EstimateState(2).mean()


@pytest.mark.slow
@pytest.mark.parametrize("graph", ["p3", "er200"])
def test_mh_consistency_within_three_se(graph):
    if graph == "p3":
        g = from_edges(TINY["p3"])
        spec = FeatureSpec.parse("degree")
    else:
        g, _ = largest_connected_component(generate_er(200, 0.05, seed=2))
        spec = FeatureSpec.parse("degree,cc")
    table = feature_table(spec, g)
    truth = oracle.exact_means(g, spec)
    hits = 0
    for r in range(100):
        trace, _ = run_walk(g, "mh", int(make_rng(r).integers(g.n)), 20_000, table, make_rng(500 + r))
        se = np.sqrt(np.diag(batch_means_covariance(trace.features).Sigma) / len(trace))
        hits += np.all(np.abs(mh_mean(trace.features) - truth) <= 3 * se)
    assert hits >= 95
