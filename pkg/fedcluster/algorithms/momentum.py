"""Momentum-Clustering: the server clusters client momentums with warm-started centers."""

import numpy as np

from fedcluster.algorithms.common import RoundResult, TrainingContext, train
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import RunRecord
from fedcluster.clustering.assignment import assign_clusters, partition_from_vectors
from fedcluster.clustering.threshold import run_threshold_clustering
from fedcluster.core.rng import stream
from fedcluster.problems.instance import ProblemInstance


def initial_center_clients(ctx: TrainingContext, k: int) -> list[int]:
  """K distinct clients whose first momentums seed the centers, drawn by data key."""
  keys = ctx.problem.data_keys
  ranked = sorted(keys)
  order = stream(ctx.cfg.seed, purpose='momentum/init').permutation(len(keys))
  chosen = [ranked[i] for i in order[:k]]
  return [keys.index(key) for key in chosen]


def run_momentum_clustering(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """Every client sends m_i <- alpha g_i(x_i) + (1 - alpha) m_i; the server clusters them.

  Momentums start at zero. Round 1 seeds the K centers with the momentums of K random clients;
  later rounds warm-start Threshold-Clustering from the previous centers. Each client steps with
  the center nearest to its momentum.
  """
  ctx = TrainingContext('momentum', problem, cfg, edge_allowed=True)
  k = cfg.clusters_for(problem)
  n = ctx.n_clients
  mask, attack = ctx.clustering_attack()
  params = ctx.initial_params()
  state = {
    'params': params,
    'momentum': np.zeros_like(params),
    'centers': None,
    'assigned': None,
  }

  def step(t: int) -> RoundResult:
    grads = ctx.gradients(state['params'], t)
    momentum = cfg.alpha * grads + (1 - cfg.alpha) * state['momentum']
    state['momentum'] = momentum
    messages = ctx.corrupt(momentum)
    if state['centers'] is None:
      state['centers'] = messages[initial_center_clients(ctx, k)]
    clustered = run_threshold_clustering(
      messages,
      k,
      inits=state['centers'],
      rounds=cfg.clustering_rounds,
      policy=cfg.radius,
      byzantine=mask,
      attack=attack,
    )
    state['centers'] = clustered.centers
    assignment = assign_clusters(messages, clustered.centers)
    state['assigned'] = clustered.centers[assignment]
    state['params'] = state['params'] - cfg.eta * state['assigned']
    return RoundResult(state['params'], assignment, 2 * n)

  def partition(last: RoundResult):
    if state['assigned'] is None:
      return [list(range(n))]
    return partition_from_vectors(state['assigned'], cfg.partition_tolerance)

  initial = RoundResult(params, np.zeros(n, dtype=np.int64), 0)
  result = train(ctx, initial, step, partition)
  if state['centers'] is not None:
    result.extras['centers'] = state['centers'].copy()
  return result
