"""Estimators for intra-cluster similarity and inter-cluster separation along a trajectory.

intra ratio of client i at x:  ||grad f_i(x) - grad fbar(x)||^2 / ||grad fbar(x)||^2
where fbar averages the losses of i's cluster.
inter separation at x:  min over i, j in different clusters of ||grad f_i(x) - grad f_j(x)||^2
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd

from fedcluster.core.vector import Vector, mean
from fedcluster.errors import ConfigurationError
from fedcluster.problems.instance import ProblemInstance

logger = logging.getLogger(__name__)

# Below this squared norm the cluster-average gradient is treated as zero (shared optimum).
UNDEFINED_BELOW = 1e-18


def _member_grads(problem: ProblemInstance, x: Vector, members: Sequence[int]) -> np.ndarray:
  return np.stack([problem.clients[i].grad(x) for i in members])


def estimate_intra_ratio(
  problem: ProblemInstance, x: Vector, cluster: Sequence[int]
) -> list[Optional[float]]:
  """Intra-cluster variance ratio of every member, exact gradients.

  Returns None for every member when the cluster-average gradient vanishes at x.
  """
  members = list(cluster)
  if not members:
    raise ConfigurationError('cluster has no members')
  grads = _member_grads(problem, x, members)
  average = mean(grads)
  denom = float(average @ average)
  if denom <= UNDEFINED_BELOW:
    return [None] * len(members)
  deviations = np.sum((grads - average) ** 2, axis=1)
  return [float(v) / denom for v in deviations]


def _cross_min(grads: np.ndarray, labels: np.ndarray) -> float:
  best = np.inf
  clusters = np.unique(labels)
  for a_index, a in enumerate(clusters):
    for b in clusters[a_index + 1 :]:
      diff = grads[labels == a][:, None, :] - grads[labels == b][None, :, :]
      best = min(best, float(np.einsum('ijk,ijk->ij', diff, diff).min()))
  return best


def estimate_inter_separation(problem: ProblemInstance, x: Vector) -> float:
  """Smallest squared gradient distance between clients of different clusters."""
  if problem.n_clusters < 2:
    raise ConfigurationError('inter-cluster separation needs at least two clusters')
  grads = _member_grads(problem, x, range(problem.n_clients))
  return _cross_min(grads, np.asarray(problem.true_labels))


@dataclass
class AssumptionTrace:
  """Per-round estimates along a trajectory.

  Attributes:
    rounds: Round index of every row.
    intra: (rounds, N) per-client intra ratios; NaN where undefined.
    cluster_intra: (rounds, K) cluster averages of the defined ratios.
    inter: (rounds,) inter-cluster separation, minimum over the cluster models.
  """

  rounds: list[int]
  intra: npt.NDArray[np.float64]
  cluster_intra: npt.NDArray[np.float64]
  inter: npt.NDArray[np.float64]

  @property
  def mean_intra(self) -> npt.NDArray[np.float64]:
    """Average over clusters of the cluster-averaged ratios."""
    with np.errstate(all='ignore'):
      return np.nanmean(self.cluster_intra, axis=1)

  def empirical_bounds(self) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Running max of the mean intra ratio and running min of the inter separation."""
    intra = np.where(np.isnan(self.mean_intra), -np.inf, self.mean_intra)
    return np.maximum.accumulate(intra), np.minimum.accumulate(self.inter)

  def to_frame(self) -> pd.DataFrame:
    """Long table with columns round, client, ratio, sep."""
    n_clients = self.intra.shape[1]
    return pd.DataFrame(
      {
        'round': np.repeat(self.rounds, n_clients),
        'client': np.tile(np.arange(n_clients), len(self.rounds)),
        'ratio': self.intra.ravel(),
        'sep': np.repeat(self.inter, n_clients),
      }
    )


def trace_assumptions(
  problem: ProblemInstance,
  cluster_models: Sequence[npt.ArrayLike],
  rounds: Optional[Sequence[int]] = None,
) -> AssumptionTrace:
  """Evaluate both estimators along a sequence of per-cluster models.

  Args:
    problem: The client population.
    cluster_models: One (K, d) array per evaluated round; cluster k's members are evaluated at
      row k. This is the ground-truth training trajectory in the standard study.
    rounds: Round labels; defaults to 0..len-1.
  """
  K = problem.n_clusters
  labels = np.asarray(problem.true_labels)
  members = [problem.members(k) for k in range(K)]
  rounds = list(range(len(cluster_models))) if rounds is None else list(rounds)
  intra = np.full((len(rounds), problem.n_clients), np.nan)
  cluster_intra = np.full((len(rounds), K), np.nan)
  inter = np.full(len(rounds), np.inf)

  for row, models in enumerate(cluster_models):
    models = np.asarray(models, dtype=np.float64)
    for k in range(K):
      ratios = estimate_intra_ratio(problem, models[k], members[k])
      defined = [r for r in ratios if r is not None]
      intra[row, members[k]] = [np.nan if r is None else r for r in ratios]
      if defined:
        cluster_intra[row, k] = float(np.mean(defined))
      if K > 1:
        grads = _member_grads(problem, models[k], range(problem.n_clients))
        inter[row] = min(inter[row], _cross_min(grads, labels))
  if K < 2:
    inter[:] = 0.0
  logger.debug(f'traced assumptions over {len(rounds)} rounds for {problem.name}')
  return AssumptionTrace(rounds=rounds, intra=intra, cluster_intra=cluster_intra, inter=inter)
