"""Reference training loops: Local, one global model and ground-truth clusters."""

import numpy as np

from fedcluster.algorithms.common import RoundResult, TrainingContext, train
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import RunRecord
from fedcluster.clustering.assignment import partition_from_labels
from fedcluster.core.vector import mean
from fedcluster.problems.instance import ProblemInstance


def run_local(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """Every client runs SGD on its own loss; nothing is exchanged."""
  ctx = TrainingContext('local', problem, cfg)
  n = ctx.n_clients
  state = {'params': ctx.initial_params()}

  def step(t: int) -> RoundResult:
    params = state['params']
    state['params'] = params - cfg.eta * ctx.gradients(params, t)
    return RoundResult(state['params'], np.arange(n), 0)

  initial = RoundResult(state['params'], np.arange(n), 0)
  return train(ctx, initial, step, lambda last: [[i] for i in range(n)])


def _grouped_training(ctx: TrainingContext, labels: np.ndarray, n_groups: int) -> RunRecord:
  """One model per label, updated with the mean (attacked) gradient of its members."""
  cfg = ctx.cfg
  n = ctx.n_clients
  groups = [np.flatnonzero(labels == k) for k in range(n_groups)]
  state = {'models': np.tile(ctx.problem.initial_params, (n_groups, 1))}

  def step(t: int) -> RoundResult:
    models = state['models']
    updated = models.copy()
    for k, members in enumerate(groups):
      grads = np.stack([ctx.gradient(i, models[k], t) for i in members])
      updated[k] = models[k] - cfg.eta * mean(ctx.corrupt(grads, members))
    state['models'] = updated
    return RoundResult(updated[labels], labels, 2 * n)

  initial = RoundResult(state['models'][labels], labels, 0)
  record = train(ctx, initial, step, lambda last: partition_from_labels(labels))
  record.extras['models'] = state['models'].copy()
  return record


def run_fedavg(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """Global: a single model stepped with the mean of all clients' gradients."""
  ctx = TrainingContext('global', problem, cfg)
  return _grouped_training(ctx, np.zeros(problem.n_clients, dtype=np.int64), 1)


def run_ground_truth(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """GT: one model per true cluster, stepped with the mean gradient of its true members."""
  ctx = TrainingContext('gt', problem, cfg)
  labels = np.asarray(problem.true_labels, dtype=np.int64)
  return _grouped_training(ctx, labels, problem.n_clusters)
