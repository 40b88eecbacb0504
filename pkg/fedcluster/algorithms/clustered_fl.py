"""Clustered-FL: recursive bipartitioning of clients by their gradients at a FedAvg optimum."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fedcluster.algorithms.common import RoundResult, TrainingContext, train
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import RunRecord
from fedcluster.clustering.assignment import labels_from_partition
from fedcluster.core.rng import RngStream
from fedcluster.core.vector import Vector, as_vector, mean, squared_distances
from fedcluster.errors import ConfigurationError, ConvergenceError
from fedcluster.problems.instance import ProblemInstance

logger = logging.getLogger(__name__)

MAX_LLOYD_ITERATIONS = 100


@dataclass(eq=False)
class _Group:
  clients: list[int]
  anchor: Vector
  trained: bool = False
  spread: Optional[float] = None
  grads: Optional[np.ndarray] = None


def fedavg_optimum(ctx: TrainingContext, clients: list[int], start: Vector) -> Vector:
  """Exact-gradient FedAvg over clients until ||mean gradient||^2 <= cfg.fedavg_tolerance.

  Raises:
    ConvergenceError: If the tolerance is not met within cfg.fedavg_rounds steps.
  """
  cfg = ctx.cfg
  x = np.array(start, dtype=np.float64)
  for _ in range(cfg.fedavg_rounds + 1):
    g = mean(np.stack([ctx.problem.clients[i].grad(x) for i in clients]))
    if float(g @ g) <= cfg.fedavg_tolerance:
      return x
    x = x - cfg.eta * g
  raise ConvergenceError(
    f'FedAvg over clients {clients} did not reach squared gradient norm '
    f'{cfg.fedavg_tolerance:g} in {cfg.fedavg_rounds} rounds'
  )


def _max_spread(points: np.ndarray) -> float:
  diff = points[:, None, :] - points[None, :, :]
  return float(np.sqrt(np.einsum('ijk,ijk->ij', diff, diff).max()))


def two_means(points: np.ndarray) -> np.ndarray:
  """Boolean mask of the second part of a 2-means split.

  Seeds are the farthest pair of rows, the first such pair in row order. Rows equidistant from both
  centers stay with the first. Lloyd iterations run until the split is stable.
  """
  diff = points[:, None, :] - points[None, :, :]
  distances = np.einsum('ijk,ijk->ij', diff, diff)
  first, second = np.unravel_index(int(np.argmax(np.triu(distances, k=1))), distances.shape)
  centers = [points[first], points[second]]
  labels = None
  for _ in range(MAX_LLOYD_ITERATIONS):
    # Strict < keeps equidistant rows with the first seed. At the reference point of Example 3
    # client 2 is equidistant from clients 1 and 3 whenever g3 = x - 1, which makes the wrong
    # split happen half the time.
    updated = squared_distances(points, centers[1]) < squared_distances(points, centers[0])
    if labels is not None and np.array_equal(updated, labels):
      break
    labels = updated
    if labels.all() or not labels.any():
      break
    centers = [mean(points[~labels]), mean(points[labels])]
  return labels


def run_clustered_fl(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """Split the clients, then train one FedAvg model per group for cfg.rounds rounds.

  The first group holds every client, anchored at the FedAvg optimum (or at the problem's reference
  point when cfg.cfl_anchor is 'reference'). Each client contributes one stochastic gradient at
  its group's anchor. The group with the largest gradient spread is split by 2-means, and each
  part is re-anchored at its own FedAvg optimum, until cfg.max_clusters groups exist or every
  spread is below cfg.split_tolerance. Clients are processed in data-key order.

  Raises:
    ConvergenceError: If a FedAvg sub-run does not converge.
    ConfigurationError: If the reference anchor is requested but the problem has none.
  """
  ctx = TrainingContext('cfl', problem, cfg)
  keys = problem.data_keys
  max_clusters = cfg.max_clusters if cfg.max_clusters is not None else problem.n_clusters
  batch_size = cfg.batch_size or 1
  split_index = 0

  def assess(group: _Group) -> None:
    nonlocal split_index
    if len(group.clients) < 2:
      group.spread = 0.0
      return
    if not group.trained:
      group.anchor = fedavg_optimum(ctx, group.clients, group.anchor)
      group.trained = True
    group.grads = np.stack(
      [
        problem.clients[i].stoch_grad(
          group.anchor,
          batch_size,
          RngStream(cfg.seed, client=keys[i], round=split_index, purpose='cfl/split'),
        )
        for i in group.clients
      ]
    )
    split_index += 1
    group.spread = _max_spread(group.grads)
    logger.debug(f'cfl group {group.clients}: spread {group.spread:.4g}')

  everyone = sorted(range(problem.n_clients), key=lambda i: keys[i])
  if cfg.cfl_anchor == 'reference':
    if problem.reference_point is None:
      raise ConfigurationError(f'{problem.name} has no reference point to split at')
    root = _Group(everyone, as_vector(problem.reference_point), trained=True)
  else:
    root = _Group(everyone, np.array(problem.initial_params, dtype=np.float64))
  groups = [root]
  first_split: dict = {}
  while len(groups) < max_clusters:
    for group in groups:
      if group.spread is None:
        assess(group)
    candidates = [g for g in groups if g.spread >= cfg.split_tolerance]
    if not candidates:
      break
    target = max(candidates, key=lambda g: g.spread)
    second = two_means(target.grads)
    if not first_split:
      first_split = {'point': target.anchor.copy(), 'gradients': target.grads.copy()}
    parts = [
      [c for c, flag in zip(target.clients, second) if not flag],
      [c for c, flag in zip(target.clients, second) if flag],
    ]
    index = next(i for i, g in enumerate(groups) if g is target)
    groups[index : index + 1] = [_Group(part, target.anchor.copy()) for part in parts]

  partition = sorted((sorted(g.clients) for g in groups), key=lambda g: g[0])
  labels = labels_from_partition(partition, problem.n_clients)
  anchors = {min(g.clients): g.anchor for g in groups}
  state = {'models': np.stack([anchors[group[0]] for group in partition])}
  n = ctx.n_clients

  def step(t: int) -> RoundResult:
    updated = state['models'].copy()
    for k, members in enumerate(partition):
      grads = np.stack([ctx.gradient(i, updated[k], t) for i in members])
      updated[k] = updated[k] - cfg.eta * mean(ctx.corrupt(grads, members))
    state['models'] = updated
    return RoundResult(updated[labels], labels, 2 * n)

  initial = RoundResult(state['models'][labels], labels, 0)
  record = train(ctx, initial, step, lambda last: partition)
  record.extras['models'] = state['models'].copy()
  record.extras.update({f'split_{key}': value for key, value in first_split.items()})
  return record
