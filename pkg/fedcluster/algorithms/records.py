"""Per-round, per-client metrics of one training run."""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import numpy.typing as npt
import pandas as pd

from fedcluster.clustering.assignment import Partition

# Emission order of the per-client metrics in the long table.
METRICS = ('grad_norm_sq', 'loss', 'test_loss', 'center_error', 'cluster')
CSV_COLUMNS = ['experiment', 'algo', 'seed', 'round', 'client', 'metric', 'value']


@dataclass
class RunRecord:
  """Everything one training run reports.

  Round 0 holds the metrics at the initial parameters; round t those after the t-th update.

  Attributes:
    algorithm: Short name of the training loop.
    problem: Name of the problem instance.
    seed: Root seed.
    honest: Per-client flag, False for Byzantine clients.
    rounds: Recorded round indices.
    metrics: Metric name -> one (N,) array per recorded round.
    messages: Messages exchanged since the previous recorded round.
    final_params: (N, d) parameters after the last recorded round.
    partition: Reported grouping of the clients at the end of the run.
    trajectory: (N, d) parameters of every recorded round when requested.
    divergence_round: Round at which parameters became non-finite, if any.
    wall_clock: Seconds spent training; kept out of the CSV.
    extras: Algorithm-specific results (cluster models, split points, ...).
  """

  algorithm: str
  problem: str
  seed: int
  honest: npt.NDArray[np.bool_]
  rounds: list[int] = field(default_factory=list)
  metrics: dict[str, list[npt.NDArray[np.float64]]] = field(default_factory=dict)
  messages: list[int] = field(default_factory=list)
  final_params: Optional[npt.NDArray[np.float64]] = None
  partition: Partition = field(default_factory=list)
  trajectory: Optional[list[npt.NDArray[np.float64]]] = None
  divergence_round: Optional[int] = None
  wall_clock: float = 0.0
  extras: dict[str, Any] = field(default_factory=dict)

  @property
  def n_clients(self) -> int:
    """N."""
    return int(self.honest.shape[0])

  @property
  def diverged(self) -> bool:
    """True when the run stopped on non-finite parameters."""
    return self.divergence_round is not None

  @property
  def total_messages(self) -> int:
    """Messages summed over all rounds."""
    return int(sum(self.messages))

  def append(self, round: int, values: dict[str, npt.NDArray[np.float64]], messages: int) -> None:
    """Add one round of metrics; rounds must be increasing."""
    if self.rounds and round <= self.rounds[-1]:
      raise ValueError(f'round {round} recorded after round {self.rounds[-1]}')
    self.rounds.append(round)
    self.messages.append(int(messages))
    for name, value in values.items():
      self.metrics.setdefault(name, []).append(np.asarray(value, dtype=np.float64))

  def series(self, metric: str) -> npt.NDArray[np.float64]:
    """(rounds, N) array of one metric."""
    if metric not in self.metrics:
      raise KeyError(f'{self.algorithm} did not record {metric!r}')
    return np.stack(self.metrics[metric])

  def final(self, metric: str) -> npt.NDArray[np.float64]:
    """Per-client values of metric in the last recorded round."""
    return self.series(metric)[-1]

  def final_mean(self, metric: str = 'test_loss', honest_only: bool = True) -> float:
    """Mean of a metric over (honest) clients at the last recorded round."""
    values = self.final(metric)
    return float(np.mean(values[self.honest] if honest_only else values))

  def time_average(self, metric: str = 'grad_norm_sq') -> npt.NDArray[np.float64]:
    """Per-client mean of the metric over every recorded round but the last.

    With metrics recorded every round this is (1/T) sum over t of the metric at x_{t-1}.
    """
    series = self.series(metric)
    return series[:-1].mean(axis=0) if series.shape[0] > 1 else series[0]

  def to_frame(self, experiment: str = '') -> pd.DataFrame:
    """Long table: one row per (round, client, metric) plus one messages row per round."""
    names = [m for m in METRICS if m in self.metrics]
    n_rounds, n_clients = len(self.rounds), self.n_clients
    values = np.stack([self.series(m) for m in names], axis=2)
    per_client = pd.DataFrame(
      {
        'round': np.repeat(self.rounds, n_clients * len(names)),
        'client': np.tile(np.repeat(np.arange(n_clients), len(names)), n_rounds),
        'metric': np.tile(names, n_rounds * n_clients),
        'value': values.ravel(),
      }
    )
    messages = pd.DataFrame(
      {
        'round': self.rounds,
        'client': -1,
        'metric': 'messages',
        'value': np.asarray(self.messages, dtype=np.float64),
      }
    )
    frame = pd.concat([messages, per_client], ignore_index=True)
    frame = frame.sort_values('round', kind='stable').reset_index(drop=True)
    frame.insert(0, 'seed', self.seed)
    frame.insert(0, 'algo', self.algorithm)
    frame.insert(0, 'experiment', experiment or self.problem)
    return frame[CSV_COLUMNS]
