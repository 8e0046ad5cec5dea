import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.spatial.distance import pdist, squareform

from nncondense.errors import (
    DimensionMismatch,
    InvalidLabel,
    MetricViolation,
    OutOfSampleUnsupported,
    ParseError,
    SingleClass,
    ZeroDiameter,
    ZeroMargin,
)
from nncondense.metric import (
    diameter,
    find_triangle_violation,
    load,
    read_labeled_csv,
    read_matrix_csv,
    scaled_margin,
    validate_matrix,
    write_matrix_csv,
)

from conftest import labeled_sets


def test_singleton_is_valid():
    ps = load([[3.0, 4.0]], [1], "l2")
    assert ps.n == 1 and ps.scale == 1.0 and ps.diameter == 0.0


def test_two_points_normalize_to_unit_distance():
    ps = load([[0.0, 0.0], [1.0, 3.0]], [1, -1], "l1")
    assert ps.scale == pytest.approx(0.25)
    assert ps.dist(0, 1) == pytest.approx(1.0)


def test_asymmetric_matrix_rejected():
    with pytest.raises(MetricViolation):
        load([[0, 1], [1, 0.5]], [1, -1], "explicit")


def test_triangle_violation_rejected():
    M = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
    with pytest.raises(MetricViolation):
        validate_matrix(M)
    assert find_triangle_violation(M) is not None


def test_bad_labels_and_coincident_points():
    with pytest.raises(InvalidLabel):
        load([[0.0], [1.0]], [1, 2], "l2")
    with pytest.raises(ZeroDiameter):
        load([[1.0], [1.0]], [1, -1], "l2")


def test_diameter_examples():
    # stored sets are normalized to diameter 1; the raw diameter is 1/scale
    assert diameter(load([[0.0], [1.0]], [1, -1])) == pytest.approx(1.0)
    sq = load([[0, 0], [0, 1], [1, 0], [1, 1]], [1, 1, -1, -1], "l1")
    assert 1 / sq.scale == pytest.approx(2.0) and diameter(sq) == pytest.approx(1.0)
    cross = load([(0, 1), (0, -1), (1, 0), (-1, 0)], [1, 1, -1, -1], "l2")
    assert 1 / cross.scale == pytest.approx(2.0)


def test_margin_of_cross(cross_set):
    m = scaled_margin(cross_set)
    assert m.gamma == pytest.approx(math.sqrt(2) / 2)
    i, j = m.witness_pair
    assert cross_set.labels[i] != cross_set.labels[j]


def test_margin_errors():
    with pytest.raises(SingleClass):
        scaled_margin(load([[0.0], [1.0]], [1, 1]))
    with pytest.raises(ZeroMargin):
        scaled_margin(load([[0.0], [0.0], [1.0]], [1, -1, 1]))


def test_query_rules():
    ps = load([[0.0, 0.0], [2.0, 0.0]], [1, -1], "l2")
    assert np.allclose(ps.query([[1.0, 0.0]], [0, 1]), [[0.5, 0.5]])
    with pytest.raises(DimensionMismatch):
        ps.query([[1.0]], [0])
    ex = load([[0, 1], [1, 0]], [1, -1], "explicit")
    with pytest.raises(OutOfSampleUnsupported):
        ex.query([[0.0]], [0])


@settings(max_examples=60, deadline=None)
@given(labeled_sets())
def test_normalized_diameter_is_one_and_margin_in_range(ps):
    D = ps.pairwise(np.arange(ps.n), np.arange(ps.n))
    assert D.max() == pytest.approx(1.0)
    assert np.array_equal(D, D.T)
    g = scaled_margin(ps).gamma
    brute = min(D[i, j] for i in range(ps.n) for j in range(ps.n) if ps.labels[i] != ps.labels[j])
    assert g == min(brute, 1.0) and 0 < g <= 1


@settings(max_examples=40, deadline=None)
@given(labeled_sets(metrics=("l1", "linf")))
def test_explicit_matches_vector_mode(ps):
    kind = {"l1": "cityblock", "linf": "chebyshev"}[ps.metric_kind]
    M = squareform(pdist(ps.raw_points(), kind))
    ex = load(M, ps.labels, "explicit")
    assert scaled_margin(ex).gamma == pytest.approx(scaled_margin(ps).gamma)


def test_csv_parse_error_names_cell(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,2,1\n3,x,2\n")
    with pytest.raises(ParseError, match="row 2.*column 2|column 2.*row 2"):
        read_labeled_csv(p, label_map={"1": 1, "2": -1})


def test_csv_filter_and_map(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,0,4\n1,1,7\n2,2,5\n3,3,4.0\n")
    X, y = read_labeled_csv(p, label_map={"4": 1, "7": -1}, keep_labels=["4", "7"])
    assert X.shape == (3, 2) and y.tolist() == [1, -1, 1]


def test_matrix_roundtrip(tmp_path):
    M = np.array([[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]])
    write_matrix_csv(M, [1, -1, 1], tmp_path / "m.csv", tmp_path / "l.csv")
    M2, y2 = read_matrix_csv(tmp_path / "m.csv", tmp_path / "l.csv")
    assert np.allclose(M, M2) and list(y2) == [1, -1, 1]
