"""Isotropic Gaussian blobs for the center-estimation studies."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from fedcluster.core.rng import stream
from fedcluster.core.vector import as_points
from fedcluster.errors import ConfigurationError
from fedcluster.problems.instance import TheoryParams


@dataclass(frozen=True)
class BlobSet:
  """Labeled points drawn around known centers.

  points is (K * per_cluster, d) with clusters laid out contiguously; sigma is the per-coordinate
  standard deviation and params.sigma the total one (sigma * sqrt(d)).
  """

  points: npt.NDArray[np.float64]
  labels: npt.NDArray[np.int64]
  centers: npt.NDArray[np.float64]
  sigma: float
  params: TheoryParams

  @property
  def n_clusters(self) -> int:
    """K."""
    return self.centers.shape[0]

  def sample_means(self) -> npt.NDArray[np.float64]:
    """Known-label sample mean of every cluster."""
    return np.stack([self.points[self.labels == k].mean(axis=0) for k in range(self.n_clusters)])


def blob_centers(K: int, d: int, seed: int, box: float = 10.0) -> npt.NDArray[np.float64]:
  """K centers uniform in [-box, box]^d."""
  return stream(seed, purpose='blobs/centers').uniform(-box, box, size=(K, d))


def min_separation(centers: npt.NDArray[np.float64]) -> float:
  """Smallest pairwise distance between centers (0 for a single center)."""
  if centers.shape[0] < 2:
    return 0.0
  diff = centers[:, None, :] - centers[None, :, :]
  dist = np.sqrt(np.einsum('ijk,ijk->ij', diff, diff))
  return float(dist[np.triu_indices(centers.shape[0], k=1)].min())


def make_blobs(
  K: int,
  per_cluster: int,
  sigma: float,
  centers: Optional[Sequence[np.ndarray] | np.ndarray] = None,
  seed: int = 0,
  d: int = 2,
) -> BlobSet:
  """Draw per_cluster points from N(center_k, sigma^2 I) for each of K centers.

  When centers is None they are drawn with blob_centers(K, d, seed).
  """
  if sigma < 0:
    raise ConfigurationError(f'sigma must be nonnegative, got {sigma}')
  if per_cluster < 1:
    raise ConfigurationError(f'per_cluster must be positive, got {per_cluster}')
  centers = blob_centers(K, d, seed) if centers is None else as_points(centers)
  if centers.shape[0] != K:
    raise ConfigurationError(f'expected {K} centers, got {centers.shape[0]}')
  d = centers.shape[1]

  points = np.concatenate(
    [
      centers[k] + sigma * stream(seed, client=k, purpose='blobs/points').standard_normal(
        (per_cluster, d)
      )
      for k in range(K)
    ]
  )
  labels = np.repeat(np.arange(K), per_cluster)
  params = TheoryParams(sigma=sigma * np.sqrt(d), delta=min_separation(centers), delta_i=1 / K)
  return BlobSet(points=points, labels=labels, centers=centers, sigma=float(sigma), params=params)
