"""Hard assignments and partitions for reporting."""

from typing import Sequence

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import distance

from fedcluster.core.vector import as_points
from fedcluster.errors import DimensionMismatchError, EmptyInputError

Partition = list[list[int]]


def assign_clusters(points, centers) -> npt.NDArray[np.int64]:
  """Index of the nearest center for every point; ties go to the lowest index."""
  points = as_points(points)
  centers = as_points(centers)
  if centers.shape[0] == 0:
    raise EmptyInputError('at least one center is required')
  if points.shape[1] != centers.shape[1]:
    raise DimensionMismatchError(
      f'points have dimension {points.shape[1]}, centers have {centers.shape[1]}'
    )
  diff = points[:, None, :] - centers[None, :, :]
  return np.argmin(np.einsum('ijk,ijk->ij', diff, diff), axis=1)


def partition_from_labels(labels: Sequence[int]) -> Partition:
  """Groups of client indices sharing a label, sorted by smallest member."""
  groups: dict[int, list[int]] = {}
  for i, label in enumerate(labels):
    groups.setdefault(int(label), []).append(i)
  return sorted(groups.values(), key=lambda g: g[0])


def partition_from_vectors(vectors, tolerance: float = 1e-6) -> Partition:
  """Merge clients whose vectors lie within tolerance of each other (transitively)."""
  vectors = as_points(vectors)
  adjacency = sparse.csr_matrix(distance.cdist(vectors, vectors) <= tolerance)
  _, labels = csgraph.connected_components(adjacency, directed=False)
  return partition_from_labels(labels)


def labels_from_partition(partition: Partition, n: int) -> npt.NDArray[np.int64]:
  """Label every client with the index of its group."""
  labels = np.full(n, -1, dtype=np.int64)
  for index, group in enumerate(partition):
    labels[group] = index
  return labels


def format_partition(partition: Partition) -> str:
  """'{0,1}|{2}' style rendering with 0-based client indices."""
  return '|'.join('{' + ','.join(str(i) for i in group) + '}' for group in partition)
