import numpy as np
import pytest

from fedcluster.core.vector import (
  as_vector,
  canonical_sum,
  mean,
  squared_distance,
  squared_distances,
)
from fedcluster.errors import ConfigurationError, DimensionMismatchError, EmptyInputError


@pytest.mark.parametrize(
  'a, b, expected',
  [
    ([1, 2], [1, 2], 0.0),
    ([0, 0], [3, 4], 25.0),
    ([1, 1, 1], [2, 3, 4], 14.0),
  ],
)
def test_squared_distance(a, b, expected):
  assert squared_distance(np.array(a, float), np.array(b, float)) == expected
  assert squared_distance(np.array(b, float), np.array(a, float)) == expected


def test_squared_distance_dimension_mismatch():
  with pytest.raises(DimensionMismatchError):
    squared_distance(np.zeros(2), np.zeros(3))


def test_squared_distances_rowwise():
  points = np.array([[0.0, 0.0], [3.0, 4.0]])
  np.testing.assert_array_equal(squared_distances(points, np.zeros(2)), [0.0, 25.0])


@pytest.mark.parametrize(
  'points, expected',
  [
    ([[2, 2]], [2, 2]),
    ([[0, 0], [2, 0]], [1, 0]),
    ([[1, 2], [3, 4], [5, 6]], [3, 4]),
  ],
)
def test_mean(points, expected):
  np.testing.assert_array_equal(mean(points), expected)


def test_mean_of_copies_is_exact():
  v = np.array([0.1, 1 / 3, -7.77e-5, 1e10])
  assert np.array_equal(mean([v] * 7), v)


def test_mean_empty_raises():
  with pytest.raises(EmptyInputError):
    mean([])


def test_mean_mixed_dimensions_raises():
  with pytest.raises(DimensionMismatchError):
    mean([[1.0, 2.0], [1.0]])


def test_as_vector_rejects_non_finite():
  with pytest.raises(ConfigurationError):
    as_vector([1.0, np.nan])
  with pytest.raises(ConfigurationError):
    as_vector(np.ones((2, 2)))


def test_as_vector_scalar():
  np.testing.assert_array_equal(as_vector(1.5), [1.5])


def test_canonical_sum_order_independent():
  rng = np.random.default_rng(0)
  rows = rng.normal(size=(50, 3)) * 10.0 ** rng.integers(-8, 8, size=(50, 1))
  total = canonical_sum(rows)
  for _ in range(5):
    shuffled = rows[rng.permutation(50)]
    assert np.array_equal(canonical_sum(shuffled), total)
