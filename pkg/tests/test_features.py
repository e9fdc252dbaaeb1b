import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netmcse.features import (
    AttributeIndicator,
    Degree,
    DegreeIndicator,
    FeatureSpec,
    FeatureSpecError,
    LocalClustering,
    NumericAttribute,
    evaluate_h,
    evaluate_h_star,
    feature_table,
)
from netmcse.graph_core import (
    AttributeTable,
    CategoricalColumn,
    from_edges,
    generate_er,
    largest_connected_component,
    node_stats,
)


@pytest.fixture
def sex_attrs():
    return AttributeTable(3, categorical={"sex": CategoricalColumn(("F", "M"), np.array([0, 1, 0]))},
                          numeric={"grade": np.array([9.0, 10.0, 11.0])})


def h(spec, g, v, attrs=None):
    return evaluate_h(FeatureSpec.parse(spec), node_stats(g, v), attrs, v).tolist()


def hs(spec, g, v, attrs=None):
    return evaluate_h_star(FeatureSpec.parse(spec), node_stats(g, v), attrs, v).tolist()


class TestEvaluateH:
    def test_triangle(self, k3):
        assert h("degree,cc", k3, 0) == [2.0, 1.0]

    def test_path_leaf(self, p3):
        assert h("degree,deg=1,cc", p3, 0) == [1.0, 1.0, 0.0]

    def test_attribute_indicator(self, p3, sex_attrs):
        assert h("degree,attr:sex=F", p3, 2, sex_attrs) == [1.0, 1.0]
        assert h("degree,attr:sex=F", p3, 1, sex_attrs) == [2.0, 0.0]

    def test_numeric_attribute_raw_value(self, p3, sex_attrs):
        assert h("num:grade", p3, 1, sex_attrs) == [10.0]

    def test_missing_attribute_table(self, p3):
        with pytest.raises(KeyError):
            h("attr:sex=F", p3, 0)


class TestEvaluateHStar:
    def test_triangle(self, k3):
        assert hs("degree,cc", k3, 0) == [0.5, 0.5]

    def test_path_center(self, p3):
        assert hs("degree,deg=2", p3, 1) == [0.5, 0.5]

    def test_star_center(self, star):
        assert hs("degree,cc", star, 0) == pytest.approx([1 / 3, 0.0])

    def test_needs_degree_first(self, k3):
        with pytest.raises(FeatureSpecError):
            hs("cc,degree", k3, 0)

    def test_zero_degree(self):
        g = from_edges([(0, 1)], n=3)
        with pytest.raises(ZeroDivisionError):
            hs("degree", g, 2)


class TestSpec:
    def test_parse_names(self):
        spec = FeatureSpec.parse("degree, deg=10, cc, attr:sex=F, num:grade")
        assert spec.components == (Degree(), DegreeIndicator(10), LocalClustering(),
                                   AttributeIndicator("sex", "F"), NumericAttribute("grade"))
        assert spec.p == 5
        assert spec.names == ["degree", "deg=10", "cc", "sex=F", "grade"]
        assert FeatureSpec.parse(spec.names[:3]) == FeatureSpec.parse("degree,deg=10,cc")

    @pytest.mark.parametrize("text", ["", "bogus", "attr:sex", "deg=-1", "deg=x"])
    def test_rejects(self, text):
        with pytest.raises((FeatureSpecError, ValueError)):
            FeatureSpec.parse(text)

    def test_validate(self, sex_attrs):
        FeatureSpec.parse("degree,attr:sex=M,num:grade").validate(sex_attrs, require_degree_first=True)
        with pytest.raises(FeatureSpecError, match="level"):
            FeatureSpec.parse("attr:sex=X").validate(sex_attrs)
        with pytest.raises(FeatureSpecError, match="race"):
            FeatureSpec.parse("attr:race=W").validate(sex_attrs)
        with pytest.raises(FeatureSpecError, match="first feature"):
            FeatureSpec.parse("cc,degree").validate(require_degree_first=True)
        with pytest.raises(FeatureSpecError):
            FeatureSpec.parse("num:height").validate(sex_attrs)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(5, 40), p=st.floats(0.1, 0.7), seed=st.integers(0, 5000), k=st.integers(1, 6))
def test_h_star_is_h_reweighted(n, p, seed, k):
    g, _ = largest_connected_component(generate_er(n, p, seed))
    if g.n < 2:
        return
    codes = np.random.default_rng(seed).integers(0, 2, g.n)
    attrs = AttributeTable(g.n, categorical={"x": CategoricalColumn(("a", "b"), codes)})
    spec = FeatureSpec.parse(f"degree,deg={k},cc,attr:x=b")
    table, table_star = feature_table(spec, g, attrs), feature_table(spec, g, attrs, transformed=True)
    for v in range(g.n):
        s = node_stats(g, v)
        hv = evaluate_h(spec, s, attrs, v)
        hsv = evaluate_h_star(spec, s, attrs, v)
        expect = hv.copy()
        expect[0] = 1.0
        assert np.allclose(hsv, expect / s.degree, rtol=1e-15, atol=0)
        assert np.array_equal(table[v], hv)
        assert np.allclose(table_star[v], hsv, rtol=1e-15, atol=0)
        assert hv[1] in (0.0, 1.0) and hv[3] in (0.0, 1.0)
        assert 0.0 <= hv[2] <= 1.0
