"""Federated-Clustering: every client robustly aggregates all clients' gradients at its own model.

Per round, client i asks every client j for g_j(x_i), runs single-center Threshold-Clustering on
those N gradients starting from its own, and steps x_i <- x_i - eta * v_i.
"""

import logging

import numpy as np
import numpy.typing as npt

from fedcluster.algorithms.common import Params, RoundResult, TrainingContext, train
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import RunRecord
from fedcluster.clustering.assignment import partition_from_labels
from fedcluster.clustering.threshold import run_threshold_clustering, threshold_clustering_batch
from fedcluster.core.vector import mean
from fedcluster.problems.instance import ProblemInstance

logger = logging.getLogger(__name__)


def exchange_gradients(ctx: TrainingContext, params: Params, round: int) -> np.ndarray:
  """All-pairs gradient table, indexed [sender, requester, :].

  Exact gradients are batched per sender; stochastic ones use one stream per (sender, requester).
  """
  n = ctx.n_clients
  if ctx.cfg.batch_size is None:
    return np.stack([ctx.problem.clients[j].grad_many(params) for j in range(n)])
  table = np.empty((n, n, params.shape[1]))
  for j in range(n):
    for i in range(n):
      table[j, i] = ctx.gradient(j, params[i], round, requester=i)
  return table


def _honest_cluster_mean(ctx: TrainingContext, points: np.ndarray, requester: int):
  label = ctx.problem.true_labels[requester]
  members = [j for j in ctx.problem.members(label) if ctx.honest[j]]
  return mean(points[members])[None, :] if members else None


def _cluster_all(
  ctx: TrainingContext, table: np.ndarray, order: npt.NDArray[np.int64]
) -> tuple[Params, npt.NDArray[np.int64]]:
  """Every client's center and reported label, all clients clustered in one batch."""
  n = ctx.n_clients
  presented = table
  if ctx.byzantine.any():
    presented = np.stack([ctx.corrupt(table[:, i, :]) for i in range(n)], axis=1)
  # Senders in data-key order, so relabeling clients leaves every sum unchanged.
  points = presented[order].transpose(1, 0, 2)
  own = table[np.arange(n), np.arange(n)]
  batch = threshold_clustering_batch(points, own, ctx.cfg.clustering_rounds, ctx.cfg.radius)
  members = np.where(batch.inside, order[None, :], n).min(axis=1)
  return batch.centers, np.minimum(members, np.arange(n))


def _cluster_one(ctx: TrainingContext, table: np.ndarray, i: int) -> tuple[np.ndarray, int]:
  """Client i's center with edge-of-ball attackers re-placed inside its clustering loop."""
  mask, attack = ctx.clustering_attack()
  honest_points = table[:, i, :]
  state = run_threshold_clustering(
    honest_points,
    1,
    inits=honest_points[i : i + 1],
    rounds=ctx.cfg.clustering_rounds,
    policy=ctx.cfg.radius,
    byzantine=mask,
    attack=attack,
    true_means=_honest_cluster_mean(ctx, honest_points, i),
  )
  return state.centers[0], min(int(state.inside[0].min(initial=i)), i)


def run_federated_clustering(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """Train one personalized model per client with Federated-Clustering.

  Each client's reported label is the smallest index among the clients whose gradients fell
  inside its final ball (itself included); the final partition groups equal labels.
  """
  ctx = TrainingContext('fc', problem, cfg, edge_allowed=True)
  n = ctx.n_clients
  order = np.argsort(problem.data_keys, kind='stable')
  state = {'params': ctx.initial_params()}

  def step(t: int) -> RoundResult:
    params = state['params']
    table = exchange_gradients(ctx, params, t)
    if ctx.edge:
      labels = np.empty(n, dtype=np.int64)
      centers = np.empty_like(params)
      for i in range(n):
        centers[i], labels[i] = _cluster_one(ctx, table, i)
    else:
      centers, labels = _cluster_all(ctx, table, order)
    state['params'] = params - cfg.eta * centers
    return RoundResult(state['params'], labels, 2 * n * (n - 1))

  initial = RoundResult(state['params'], np.arange(n), 0)
  return train(ctx, initial, step, lambda last: partition_from_labels(last.assignment))
