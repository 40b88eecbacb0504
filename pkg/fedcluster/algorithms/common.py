"""Machinery shared by the training loops: gradient queries, attacks, metrics, the round driver."""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import numpy.typing as npt

from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import RunRecord
from fedcluster.attacks.kinds import EdgeOfBall, NoAttack, apply_attack
from fedcluster.attacks.schedule import byzantine_mask
from fedcluster.clustering.assignment import Partition
from fedcluster.core.rng import RngStream
from fedcluster.core.vector import Vector
from fedcluster.errors import ConfigurationError, DivergenceError
from fedcluster.problems.instance import ProblemInstance

logger = logging.getLogger(__name__)

Params = npt.NDArray[np.float64]


@dataclass
class RoundResult:
  """State after one round: (N, d) parameters, per-client cluster label, messages sent."""

  params: Params
  assignment: npt.NDArray[np.int64]
  messages: int = 0


class TrainingContext:
  """A problem, its config and the Byzantine flags, with the queries every loop needs.

  Args:
    name: Algorithm name used in records and errors.
    problem: The client population.
    cfg: Training configuration.
    edge_allowed: Whether the loop clusters messages with Threshold-Clustering, the only place an
      edge-of-ball attacker can be placed.
  """

  def __init__(
    self, name: str, problem: ProblemInstance, cfg: TrainerConfig, edge_allowed: bool = False
  ):
    self.name = name
    self.problem = problem
    self.cfg = cfg
    self.n_clients = problem.n_clients
    self.byzantine = byzantine_mask(cfg.byzantine, self.n_clients, cfg.seed, problem.data_keys)
    self.honest = ~self.byzantine
    self.attack = cfg.byzantine.kind if self.byzantine.any() else NoAttack()
    self.edge = isinstance(self.attack, EdgeOfBall)
    if self.edge and not edge_allowed:
      raise ConfigurationError(f'{name} does not threshold messages; edge-of-ball needs a ball')

  def initial_params(self) -> Params:
    """Every client starts from the problem's initial point."""
    return np.tile(self.problem.initial_params, (self.n_clients, 1))

  def stream(self, sender: int, round: int, requester: Optional[int] = None, step: int = 0):
    """Random stream of one gradient query, keyed by the data identities involved."""
    keys = self.problem.data_keys
    target = keys[sender] if requester is None else keys[requester]
    purpose = f'grad/{target}' if step == 0 else f'grad/{target}/step{step}'
    return RngStream(self.cfg.seed, client=keys[sender], round=round, purpose=purpose)

  def gradient(
    self, client: int, x: Vector, round: int, requester: Optional[int] = None, step: int = 0
  ) -> Vector:
    """Gradient of client at x: exact, or over a batch drawn from the query's own stream."""
    oracle = self.problem.clients[client]
    if self.cfg.batch_size is None:
      return oracle.grad(x)
    return oracle.stoch_grad(x, self.cfg.batch_size, self.stream(client, round, requester, step))

  def gradients(self, params: Params, round: int) -> Params:
    """Every client's gradient at its own parameters."""
    return np.stack([self.gradient(i, params[i], round) for i in range(self.n_clients)])

  def corrupt(self, messages: Params, senders: Optional[Sequence[int]] = None) -> Params:
    """Replace the Byzantine rows by their attack. Edge-of-ball is placed inside clustering.

    Row r of messages comes from client senders[r]; all clients in order when omitted.
    """
    if isinstance(self.attack, NoAttack) or self.edge:
      return messages
    senders = range(self.n_clients) if senders is None else senders
    presented = messages.copy()
    for row, client in enumerate(senders):
      if self.byzantine[client]:
        presented[row] = apply_attack(self.attack, messages[row])
    return presented

  def clustering_attack(self) -> tuple[Optional[npt.NDArray[np.bool_]], object]:
    """Mask and attack to hand to Threshold-Clustering (edge-of-ball only)."""
    return (self.byzantine, self.attack) if self.edge else (None, None)


class RoundRecorder:
  """Evaluates per-client metrics and accumulates them into a RunRecord."""

  def __init__(self, ctx: TrainingContext):
    self.ctx = ctx
    cfg = ctx.cfg
    problem = ctx.problem
    self.optima = problem.true_optima if cfg.track_center_error else None
    self.record = RunRecord(
      algorithm=ctx.name,
      problem=problem.name,
      seed=cfg.seed,
      honest=ctx.honest.copy(),
      trajectory=[] if cfg.keep_trajectory else None,
    )

  def observe(self, round: int, result: RoundResult, messages: Optional[int] = None) -> None:
    """Record the metrics of one round; messages defaults to those of the round itself."""
    problem = self.ctx.problem
    n = problem.n_clients
    grad_norm = np.full(n, np.inf)
    loss = np.full(n, np.inf)
    test_loss = np.full(n, np.inf)
    error = np.full(n, np.inf)
    for i, oracle in enumerate(problem.clients):
      x = result.params[i]
      if not np.all(np.isfinite(x)):
        continue
      g = oracle.grad(x)
      grad_norm[i] = float(g @ g)
      if problem.has_values:
        loss[i] = oracle.value(x)
        test_loss[i] = oracle.test_value(x)
      if self.optima is not None:
        e = x - self.optima[problem.true_labels[i]]
        error[i] = float(e @ e)
    values = {'grad_norm_sq': grad_norm}
    if problem.has_values:
      values['loss'] = loss
      values['test_loss'] = test_loss
    if self.optima is not None:
      values['center_error'] = error
    values['cluster'] = np.asarray(result.assignment, dtype=np.float64)
    self.record.append(round, values, result.messages if messages is None else messages)
    if self.record.trajectory is not None:
      self.record.trajectory.append(result.params.copy())


def _check_divergence(
  ctx: TrainingContext,
  round: int,
  result: RoundResult,
  previous: RoundResult,
  recorder: RoundRecorder,
  messages: int,
) -> bool:
  bad = ~np.all(np.isfinite(result.params), axis=1)
  if not bad.any():
    return False
  client = int(np.flatnonzero(bad)[0])
  logger.error(f'{ctx.name} on {ctx.problem.name} (seed {ctx.cfg.seed}) diverged at round {round}')
  if ctx.cfg.halt_on_divergence:
    recorder.record.final_params = previous.params.copy()
    raise DivergenceError(ctx.name, round, client, partial=recorder.record)
  recorder.observe(round, result, messages)
  recorder.record.divergence_round = round
  return True


def train(
  ctx: TrainingContext,
  initial: RoundResult,
  step: Callable[[int], RoundResult],
  partition: Callable[[RoundResult], Partition],
  rounds: Optional[int] = None,
) -> RunRecord:
  """Record round 0, run step(t) for t = 1..T and finish the record.

  Metrics are recorded every cfg.eval_every rounds and at the last round; each recorded round
  carries the messages sent since the previous one. Divergence is checked every round.

  Raises:
    DivergenceError: When parameters become non-finite and the config halts on divergence.
  """
  started = time.perf_counter()
  recorder = RoundRecorder(ctx)
  total = rounds if rounds is not None else ctx.cfg.rounds
  every = ctx.cfg.eval_every
  last = initial
  messages = 0
  with np.errstate(over='ignore', invalid='ignore'):
    recorder.observe(0, initial)
    for t in range(1, total + 1):
      result = step(t)
      messages += result.messages
      diverged = _check_divergence(ctx, t, result, last, recorder, messages)
      last = result
      if diverged:
        break
      if t % every == 0 or t == total:
        recorder.observe(t, result, messages)
        messages = 0
  record = recorder.record
  record.final_params = last.params.copy()
  record.partition = partition(last)
  record.wall_clock = time.perf_counter() - started
  logger.debug(
    f'{ctx.name} on {ctx.problem.name} seed {ctx.cfg.seed}: {len(record.rounds) - 1} rounds, '
    f'{record.total_messages} messages, {record.wall_clock:.3f}s'
  )
  return record
