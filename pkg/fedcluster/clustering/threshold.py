"""Threshold-Clustering: iterated clipped-mean estimation of K cluster centers.

Every iteration replaces the points farther than tau from a center by the center itself and
averages over all N points:

  v <- v + (1/N) * sum_{||z - v|| <= tau} (z - v)

Inside offsets are summed in canonical (lexicographic) order so the update is bit-identical under
any reordering of the points.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from fedcluster.attacks.kinds import AttackContext, EdgeOfBall, NoAttack, apply_attack
from fedcluster.clustering.radius import FixedRadius, RadiusPolicy
from fedcluster.core.vector import Vector, as_points, canonical_sum, squared_distances
from fedcluster.errors import ConfigurationError, DimensionMismatchError

logger = logging.getLogger(__name__)

Points = npt.NDArray[np.float64]


@dataclass
class CenterState:
  """Centers and radii after the last iteration.

  Attributes:
    centers: (K, d) center estimates.
    radii: Radius used for each cluster in the last iteration.
    round: Number of iterations performed.
    trajectory: Centers before the first and after every iteration, (round + 1) entries.
    inside: Per cluster, indices of the points inside the last ball.
  """

  centers: Points
  radii: npt.NDArray[np.float64]
  round: int = 0
  trajectory: list[Points] = field(default_factory=list)
  inside: list[npt.NDArray[np.int64]] = field(default_factory=list)

  def __post_init__(self):
    if self.centers.shape[0] != self.radii.shape[0] or self.centers.shape[0] < 1:
      raise ConfigurationError('centers and radii must have the same positive length')

  @property
  def n_clusters(self) -> int:
    """Number of centers."""
    return self.centers.shape[0]


def clip_point(z: Vector, v: Vector, tau: float) -> Vector:
  """z when ||z - v|| <= tau (inclusive), otherwise v."""
  if np.shape(z) != np.shape(v):
    raise DimensionMismatchError(f'dimension mismatch: {np.shape(z)} vs {np.shape(v)}')
  diff = z - v
  return z if float(diff @ diff) <= tau * tau else v


def _inside(points: Points, v: Vector, tau: float) -> npt.NDArray[np.bool_]:
  if np.isinf(tau):
    return np.ones(points.shape[0], dtype=bool)
  return squared_distances(points, v) <= tau * tau


def _step(points: Points, v: Vector, tau: float) -> tuple[Vector, npt.NDArray[np.int64]]:
  inside = _inside(points, v, tau)
  offsets = points[inside] - v
  return v + canonical_sum(offsets) / points.shape[0], np.flatnonzero(inside)


def threshold_update(points: Sequence[Vector] | Points, v_prev: Vector, tau: float) -> Vector:
  """One clipped-mean update: the average of clip_point(z, v_prev, tau) over all points."""
  array = as_points(points)
  v_prev = np.atleast_1d(np.asarray(v_prev, dtype=np.float64))
  if array.shape[1] != v_prev.shape[0]:
    raise DimensionMismatchError(
      f'points have dimension {array.shape[1]}, center has {v_prev.shape[0]}'
    )
  if tau < 0:
    raise ConfigurationError(f'radius must be nonnegative, got {tau}')
  return _step(array, v_prev, tau)[0]


@dataclass
class BatchState:
  """R independent single-center runs after the last iteration.

  Attributes:
    centers: (R, d) center estimates.
    radii: (R,) radius of each run in the last iteration.
    inside: (R, N) mask of the points inside each last ball.
    trajectory: (R, d) centers before the first and after every iteration.
  """

  centers: Points
  radii: npt.NDArray[np.float64]
  inside: npt.NDArray[np.bool_]
  trajectory: list[Points] = field(default_factory=list)


def threshold_clustering_batch(
  points: npt.NDArray[np.float64], inits: Points, rounds: int, policy: RadiusPolicy
) -> BatchState:
  """Run R single-center Threshold-Clustering problems of N points each in lockstep.

  Row r of points, (R, N, d), is clustered starting from inits[r]. Inside offsets are summed
  along the point axis in the order given, so callers wanting order-independent results pass
  the points in a canonical order.
  """
  if rounds < 1:
    raise ConfigurationError(f'rounds must be at least 1, got {rounds}')
  r, n, d = points.shape
  if inits.shape != (r, d):
    raise DimensionMismatchError(f'expected inits of shape {(r, d)}, got {inits.shape}')
  centers = np.array(inits, dtype=np.float64)
  trajectory = [centers.copy()]
  tau2 = np.zeros(r)
  inside = np.zeros((r, n), dtype=bool)
  for _ in range(rounds):
    diff = points - centers[:, None, :]
    squared = np.einsum('rnj,rnj->rn', diff, diff)
    tau2 = policy.squared_radii(squared)
    inside = (squared <= tau2[:, None]) | np.isinf(tau2)[:, None]
    offsets = np.where(inside[:, :, None], diff, 0.0)
    centers = centers + np.add.reduce(offsets, axis=1) / n
    trajectory.append(centers.copy())
  return BatchState(centers=centers, radii=np.sqrt(tau2), inside=inside, trajectory=trajectory)


def farthest_first_inits(points: Points, K: int) -> Points:
  """K well-spread starting centers chosen from the points.

  Starts at the lexicographically smallest point and repeatedly adds the point farthest from the
  chosen set. Ties go to the lexicographically smaller point, so the result depends only on the
  point values.
  """
  points = as_points(points)
  if K < 1 or K > points.shape[0]:
    raise ConfigurationError(f'cannot pick {K} initial centers from {points.shape[0]} points')
  canonical = points[np.lexsort(points.T[::-1])]
  chosen = [0]
  nearest = squared_distances(canonical, canonical[0])
  while len(chosen) < K:
    candidates = nearest.copy()
    candidates[chosen] = -1.0
    nxt = int(np.argmax(candidates))
    chosen.append(nxt)
    nearest = np.minimum(nearest, squared_distances(canonical, canonical[nxt]))
  return canonical[chosen].copy()


def _nearest_mean(v: Vector, true_means: Optional[Points]) -> Optional[Vector]:
  if true_means is None:
    return None
  return true_means[int(np.argmin(squared_distances(true_means, v)))]


def run_threshold_clustering(
  points: Sequence[Vector] | Points,
  K: int,
  inits: Optional[Sequence[Vector] | Points] = None,
  rounds: int = 10,
  policy: Optional[RadiusPolicy] = None,
  byzantine: Optional[npt.NDArray[np.bool_]] = None,
  attack=None,
  true_means: Optional[Points] = None,
) -> CenterState:
  """Run Threshold-Clustering for a fixed number of iterations.

  Args:
    points: The N points to cluster, (N, d).
    K: Number of clusters.
    inits: K starting centers; farthest_first_inits when omitted.
    rounds: Number of iterations M.
    policy: Radius policy, recomputed for every (cluster, iteration). Defaults to no clipping.
    byzantine: Optional mask of points controlled by an attacker.
    attack: Attack applied to the masked points. EdgeOfBall attackers are re-placed for every
      cluster and iteration using that update's center and radius; other kinds transform the
      masked points once before clustering.
    true_means: Known cluster means, used only to aim EdgeOfBall attackers.

  Returns:
    The final CenterState with its per-iteration trajectory.
  """
  points = as_points(points)
  if rounds < 1:
    raise ConfigurationError(f'rounds must be at least 1, got {rounds}')
  policy = policy if policy is not None else FixedRadius(tau=float('inf'))
  centers = farthest_first_inits(points, K) if inits is None else as_points(inits).copy()
  if centers.shape != (K, points.shape[1]):
    raise DimensionMismatchError(
      f'expected {K} inits of dimension {points.shape[1]}, got shape {centers.shape}'
    )

  attacked = byzantine is not None and bool(np.any(byzantine)) and attack is not None
  attacked = attacked and not isinstance(attack, NoAttack)
  edge = attacked and isinstance(attack, EdgeOfBall)
  if attacked and not edge:
    points = points.copy()
    for i in np.flatnonzero(byzantine):
      points[i] = apply_attack(attack, points[i])

  if not edge:
    # Sum offsets in lexicographic point order so the result ignores input order.
    order = np.lexsort(points.T[::-1])
    stacked = np.broadcast_to(points[order], (K, *points.shape))
    batch = threshold_clustering_batch(stacked, centers, rounds, policy)
    return CenterState(
      centers=batch.centers,
      radii=batch.radii,
      round=rounds,
      trajectory=batch.trajectory,
      inside=[np.sort(order[row]) for row in batch.inside],
    )

  # Edge-of-ball attackers move with every (cluster, iteration), so clusters update one by one.
  radii = np.zeros(K)
  trajectory = [centers.copy()]
  inside: list[npt.NDArray[np.int64]] = [np.empty(0, dtype=np.int64)] * K
  for _ in range(rounds):
    updated = np.empty_like(centers)
    for k in range(K):
      v = centers[k]
      tau = policy.radius(points, v)
      context = AttackContext(center=v, radius=tau, true_mean=_nearest_mean(v, true_means))
      presented = points.copy()
      presented[byzantine] = apply_attack(attack, v, context)
      radii[k] = tau
      updated[k], inside[k] = _step(presented, v, tau)
    centers = updated
    trajectory.append(centers.copy())

  return CenterState(
    centers=centers, radii=radii.copy(), round=rounds, trajectory=trajectory, inside=list(inside)
  )
