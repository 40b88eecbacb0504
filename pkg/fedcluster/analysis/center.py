"""Center-estimation error against known means."""

from typing import Sequence

import numpy as np
import numpy.typing as npt
from scipy.optimize import linear_sum_assignment

from fedcluster.clustering.threshold import CenterState
from fedcluster.core.vector import as_points
from fedcluster.errors import ConfigurationError


def center_error(
  centers: CenterState | npt.ArrayLike, true_means: npt.ArrayLike, match: bool = True
) -> npt.NDArray[np.float64]:
  """Squared distance from every true mean to its matched center estimate.

  Centers are matched to means by the minimum-cost assignment (scipy's Hungarian solver); with
  match=False center k is compared with mean k.
  """
  estimates = as_points(centers.centers if isinstance(centers, CenterState) else centers)
  means = as_points(true_means)
  if estimates.shape != means.shape:
    raise ConfigurationError(f'{estimates.shape} centers cannot be matched to {means.shape} means')
  diff = estimates[:, None, :] - means[None, :, :]
  cost = np.einsum('ijk,ijk->ij', diff, diff)
  if not match:
    return np.diag(cost).copy()
  rows, cols = linear_sum_assignment(cost)
  errors = np.empty(means.shape[0])
  errors[cols] = cost[rows, cols]
  return errors


def oracle_center_error(
  points: npt.ArrayLike, labels: Sequence[int], true_means: npt.ArrayLike
) -> npt.NDArray[np.float64]:
  """Error of the known-label sample mean of every cluster."""
  points = as_points(points)
  labels = np.asarray(labels)
  means = as_points(true_means)
  sample_means = np.stack([points[labels == k].mean(axis=0) for k in range(means.shape[0])])
  return np.sum((sample_means - means) ** 2, axis=1)


def elbow_index(curve: Sequence[float], flatness: float = 0.05, settled: float = 0.01) -> int:
  """Iteration after which an error curve f is flat.

  Step l is flat when it removes at most flatness of the excess still left over the curve's
  minimum, i.e. (f(l) - f(l-1)) / (f(l-1) - min f) >= -flatness. The elbow is l - 1 for the first
  flat step, or the first iteration whose excess is at most settled times the total drop
  f(0) - min f, whichever comes first. Both tests are relative, so rescaling f keeps the elbow.
  A constant curve has its elbow at 0; a curve that never flattens has it at the last index.
  """
  curve = np.asarray(curve, dtype=np.float64)
  if curve.size == 0:
    raise ConfigurationError('empty error curve')
  if not 0 < flatness < 1 or not 0 <= settled < 1:
    raise ConfigurationError(
      f'need 0 < flatness < 1 and 0 <= settled < 1, got {flatness} and {settled}'
    )
  excess = curve - curve.min()
  drop = excess[0]
  for l in range(1, curve.size):
    if excess[l - 1] <= settled * drop:
      return l - 1
    if (curve[l] - curve[l - 1]) / excess[l - 1] >= -flatness:
      return l - 1
  return curve.size - 1
