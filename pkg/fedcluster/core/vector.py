"""Dense vector helpers.

Vectors are 1-D float64 numpy arrays. Batches of vectors are 2-D arrays with one vector per row.
"""

from typing import Sequence

import numpy as np
import numpy.typing as npt

from fedcluster.errors import ConfigurationError, DimensionMismatchError, EmptyInputError

Vector = npt.NDArray[np.float64]


def as_vector(coords: Sequence[float] | npt.ArrayLike) -> Vector:
  """Coerce coordinates into a finite 1-D float64 vector.

  Scalars become 1-dimensional vectors.

  Raises:
    ConfigurationError: If the input is not 1-D or holds NaN/Inf.
  """
  vector = np.atleast_1d(np.asarray(coords, dtype=np.float64))
  if vector.ndim != 1 or vector.size == 0:
    raise ConfigurationError(f'expected a non-empty 1-D vector, got shape {vector.shape}')
  if not np.all(np.isfinite(vector)):
    raise ConfigurationError('vector coordinates must be finite')
  return vector


def as_points(points: Sequence[Vector] | npt.ArrayLike) -> npt.NDArray[np.float64]:
  """Stack points into an (n, d) array.

  Raises:
    EmptyInputError: If there are no points.
    DimensionMismatchError: If the points do not share one dimension.
  """
  if isinstance(points, np.ndarray):
    array = np.asarray(points, dtype=np.float64)
    if array.ndim == 1:
      array = array[:, None]
  else:
    if len(points) == 0:
      raise EmptyInputError('at least one point is required')
    rows = [np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in points]
    dims = {row.shape for row in rows}
    if len(dims) != 1:
      raise DimensionMismatchError(f'points have mixed dimensions: {sorted(dims)}')
    array = np.stack(rows)
  if array.shape[0] == 0:
    raise EmptyInputError('at least one point is required')
  return array


def squared_distance(a: Vector, b: Vector) -> float:
  """Squared Euclidean distance between two vectors of equal dimension."""
  a = np.asarray(a, dtype=np.float64)
  b = np.asarray(b, dtype=np.float64)
  if a.shape != b.shape:
    raise DimensionMismatchError(f'dimension mismatch: {a.shape} vs {b.shape}')
  diff = a - b
  return float(np.dot(diff.ravel(), diff.ravel()))


def squared_distances(points: npt.NDArray[np.float64], center: Vector) -> npt.NDArray[np.float64]:
  """Row-wise squared distances from every point to one center."""
  if points.shape[1] != np.shape(center)[0]:
    raise DimensionMismatchError(
      f'dimension mismatch: points have {points.shape[1]}, center has {np.shape(center)[0]}'
    )
  diff = points - center
  return np.einsum('ij,ij->i', diff, diff)


def mean(points: Sequence[Vector] | npt.ArrayLike) -> Vector:
  """Coordinate-wise mean of a non-empty list of points.

  Computed as the lexicographically smallest point plus the mean offset from it, summed in
  canonical order. k copies of v average to v exactly and the result does not depend on the
  order of the points.
  """
  array = as_points(points)
  anchor = array[np.lexsort(array.T[::-1])[0]]
  return anchor + canonical_sum(array - anchor) / array.shape[0]


def canonical_sum(rows: npt.NDArray[np.float64]) -> Vector:
  """Sum rows in lexicographic order of their coordinates.

  The result does not depend on the order rows are given in, which keeps reductions
  bit-identical under any permutation of clients.
  """
  if rows.shape[0] == 0:
    return np.zeros(rows.shape[1], dtype=np.float64)
  order = np.lexsort(rows.T[::-1])
  return np.add.reduce(rows[order], axis=0)
