"""Loss-based cluster selection baselines: IFCA (Options I and II) and HypCluster."""

import logging
from typing import Literal, Optional

import numpy as np

from fedcluster.algorithms.common import Params, RoundResult, TrainingContext, train
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import RunRecord
from fedcluster.clustering.assignment import partition_from_labels
from fedcluster.core.rng import stream
from fedcluster.core.vector import Vector, as_points, mean
from fedcluster.errors import ConfigurationError
from fedcluster.problems.instance import ProblemInstance

logger = logging.getLogger(__name__)


def _require_values(problem: ProblemInstance, name: str) -> None:
  if not problem.has_values:
    raise ConfigurationError(
      f'{name} selects clusters by loss value, but {problem.name} exposes gradients only'
    )


def cluster_inits(problem: ProblemInstance, k: int, seed: int) -> Params:
  """The problem's cluster models when it has them, else x_0 plus seeded standard normal noise."""
  if problem.cluster_inits is not None:
    models = as_points(problem.cluster_inits).copy()
    if models.shape[0] != k:
      raise ConfigurationError(f'{problem.name} provides {models.shape[0]} inits, K={k}')
    return models
  noise = stream(seed, purpose='ifca/init').normal(size=(k, problem.dim))
  return problem.initial_params + noise


def select_clusters(problem: ProblemInstance, models: Params) -> np.ndarray:
  """argmin_k f_i(x_k) for every client; ties go to the lowest k."""
  losses = np.array([[oracle.value(model) for model in models] for oracle in problem.clients])
  return np.argmin(losses, axis=1)


def _local_model(ctx: TrainingContext, client: int, start: Vector, round: int) -> Vector:
  x = start.copy()
  for s in range(ctx.cfg.local_steps):
    x = x - ctx.cfg.eta * ctx.gradient(client, x, round, step=s)
  return x


def run_ifca(
  problem: ProblemInstance,
  cfg: TrainerConfig,
  option: Optional[Literal['I', 'II']] = None,
  local_steps: Optional[int] = None,
) -> RunRecord:
  """Iterative Federated Clustering.

  Every round the server broadcasts all K models, each client picks the one with the lowest
  loss, and each selected model is updated from its members: Option I averages their gradients at
  the model, Option II averages the models they reach after local_steps local GD steps. Models
  nobody selected stay unchanged.

  Args:
    problem: Clients with loss values.
    cfg: Training configuration.
    option: Overrides cfg.ifca_option.
    local_steps: Overrides cfg.local_steps.

  Raises:
    ConfigurationError: If the clients expose no loss values.
  """
  _require_values(problem, 'IFCA')
  option = option or cfg.ifca_option
  if local_steps is not None:
    cfg = cfg.model_copy(update={'local_steps': local_steps})
  ctx = TrainingContext(f'ifca_{option.lower()}', problem, cfg)
  k = cfg.clusters_for(problem)
  n = ctx.n_clients
  state = {'models': cluster_inits(problem, k, cfg.seed)}

  def step(t: int) -> RoundResult:
    models = state['models']
    assignment = select_clusters(problem, models)
    updated = models.copy()
    for c in range(k):
      members = np.flatnonzero(assignment == c)
      if members.size == 0:
        continue
      if option == 'I':
        grads = np.stack([ctx.gradient(i, models[c], t) for i in members])
        updated[c] = models[c] - cfg.eta * mean(ctx.corrupt(grads, members))
      else:
        local = np.stack([_local_model(ctx, i, models[c], t) for i in members])
        updated[c] = mean(ctx.corrupt(local, members))
    state['models'] = updated
    return RoundResult(updated[assignment], assignment, n * (k + 1))

  start = select_clusters(problem, state['models'])
  initial = RoundResult(state['models'][start], start, 0)
  record = train(ctx, initial, step, lambda last: partition_from_labels(last.assignment))
  record.extras['models'] = state['models'].copy()
  return record


def run_hypcluster(problem: ProblemInstance, cfg: TrainerConfig) -> RunRecord:
  """Centralized Option II: loss-based assignment, then local_steps GD steps per cluster model.

  Each step uses the mean gradient of the cluster's members. No messages are exchanged.
  """
  _require_values(problem, 'HypCluster')
  ctx = TrainingContext('hypcluster', problem, cfg)
  k = cfg.clusters_for(problem)
  state = {'models': cluster_inits(problem, k, cfg.seed)}

  def step(t: int) -> RoundResult:
    models = state['models']
    assignment = select_clusters(problem, models)
    updated = models.copy()
    for c in range(k):
      members = np.flatnonzero(assignment == c)
      if members.size == 0:
        continue
      x = models[c]
      for s in range(cfg.local_steps):
        grads = np.stack([ctx.gradient(i, x, t, step=s) for i in members])
        x = x - cfg.eta * mean(ctx.corrupt(grads, members))
      updated[c] = x
    state['models'] = updated
    return RoundResult(updated[assignment], assignment, 0)

  start = select_clusters(problem, state['models'])
  initial = RoundResult(state['models'][start], start, 0)
  record = train(ctx, initial, step, lambda last: partition_from_labels(last.assignment))
  record.extras['models'] = state['models'].copy()
  return record
