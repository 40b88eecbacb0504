"""Myopic-Clustering: the server clusters each client's gradient at that client's own model."""

import numpy as np

from fedcluster.algorithms.common import RoundResult, TrainingContext, train
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import RunRecord
from fedcluster.clustering.assignment import assign_clusters, partition_from_vectors
from fedcluster.clustering.threshold import farthest_first_inits, run_threshold_clustering
from fedcluster.problems.instance import ProblemInstance


def run_myopic(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """Cluster {g_i(x_i)} into K groups every round and step every client with its center.

  Centers are re-initialized every round by farthest-first selection over the received gradients.
  The reported partition merges clients whose assigned centers coincide up to
  cfg.partition_tolerance.
  """
  ctx = TrainingContext('myopic', problem, cfg, edge_allowed=True)
  k = cfg.clusters_for(problem)
  n = ctx.n_clients
  mask, attack = ctx.clustering_attack()
  state = {'params': ctx.initial_params(), 'centers': None}

  def step(t: int) -> RoundResult:
    params = state['params']
    messages = ctx.corrupt(ctx.gradients(params, t))
    clustered = run_threshold_clustering(
      messages,
      k,
      inits=farthest_first_inits(messages, k),
      rounds=cfg.clustering_rounds,
      policy=cfg.radius,
      byzantine=mask,
      attack=attack,
    )
    assignment = assign_clusters(messages, clustered.centers)
    state['centers'] = clustered.centers[assignment]
    state['params'] = params - cfg.eta * state['centers']
    return RoundResult(state['params'], assignment, 2 * n)

  def partition(last: RoundResult):
    if state['centers'] is None:
      return [list(range(n))]
    return partition_from_vectors(state['centers'], cfg.partition_tolerance)

  initial = RoundResult(state['params'], np.zeros(n, dtype=np.int64), 0)
  return train(ctx, initial, step, partition)
