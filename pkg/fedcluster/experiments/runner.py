"""Runs an experiment: seeds fan out over a thread pool, outputs are written as seeds finish."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fedcluster.experiments.catalog import get_experiment
from fedcluster.experiments.config import ExperimentConfig, load_config
from fedcluster.experiments.output import csv_path, label_results, write_seed, write_summary
from fedcluster.experiments.studies import SeedOutcome
from fedcluster.utils.env import thread_count

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGED = 3


@dataclass
class ExperimentReport:
  """Outcome of one experiment invocation.

  Attributes:
    config: The resolved configuration.
    outcomes: One SeedOutcome per seed, in seed order.
    values: Aggregated values computed by the experiment's summary.
    checks: Named pass/fail results.
    files: Every file written.
    threads: Worker pool size used.
    wall_clock: Seconds for the whole invocation.
  """

  config: ExperimentConfig
  outcomes: list[SeedOutcome]
  values: dict[str, Any]
  checks: dict[str, bool]
  files: list[Path] = field(default_factory=list)
  threads: int = 1
  wall_clock: float = 0.0

  @property
  def diverged(self) -> list[tuple[str, int]]:
    """(label, seed) pairs that stopped on non-finite parameters."""
    return [(label, o.seed) for o in self.outcomes for label in o.diverged]

  @property
  def passed(self) -> bool:
    """True when every check passed."""
    return all(self.checks.values())

  @property
  def exit_code(self) -> int:
    """0 when every run completed, 3 when any diverged. Failed checks do not change it."""
    return EXIT_DIVERGED if self.diverged else EXIT_OK

  def csv_path(self, label: str, seed: int) -> Path:
    """Metric CSV of one (label, seed)."""
    return csv_path(self.config, label, seed)

  def to_dict(self) -> dict[str, Any]:
    """JSON-ready summary."""
    cfg = self.config
    return {
      'experiment': cfg.experiment,
      'algorithms': cfg.algorithms,
      'seeds': cfg.seeds,
      'config': cfg.model_dump(mode='json'),
      'results': label_results(self.outcomes),
      'values': self.values,
      'checks': self.checks,
      'passed': self.passed,
      'diverged': [{'label': label, 'seed': seed} for label, seed in self.diverged],
      'threads': self.threads,
      'wall_clock': self.wall_clock,
    }


def run_experiment(cfg: ExperimentConfig | str | Path, write: bool = True) -> ExperimentReport:
  """Run every seed of an experiment and summarize.

  Args:
    cfg: A config, or the path of a YAML config file.
    write: Write the per-seed CSVs and summary.json under cfg.out_dir/<experiment>/.

  Raises:
    ConfigurationError: For unknown experiments or invalid parameters.
    pydantic.ValidationError: When the merged configuration does not validate.
  """
  if not isinstance(cfg, ExperimentConfig):
    cfg = load_config(cfg)
  experiment = get_experiment(cfg.experiment)
  cfg = experiment.resolve(cfg)
  threads = thread_count(cfg.threads)
  algorithms = ','.join(cfg.algorithms) or 'no training loops'
  logger.info(f'{cfg.experiment}: {len(cfg.seeds)} seeds, {algorithms}, {threads} threads')

  started = time.perf_counter()
  outcomes: list[SeedOutcome] = []
  files: list[Path] = []
  with ThreadPoolExecutor(max_workers=threads) as executor:
    futures = {executor.submit(experiment.run_seed, cfg, seed): seed for seed in cfg.seeds}
    for future in as_completed(futures):
      outcome = future.result()
      logger.debug(f'{cfg.experiment} seed {futures[future]} done')
      if write:
        files.extend(write_seed(cfg, outcome))
      outcomes.append(outcome)
  outcomes.sort(key=lambda o: o.seed)

  values, checks = experiment.summarize(cfg, outcomes)
  report = ExperimentReport(
    config=cfg, outcomes=outcomes, values=values, checks=checks, files=files, threads=threads
  )
  report.wall_clock = time.perf_counter() - started
  if write:
    report.files.append(write_summary(cfg, report.to_dict()))
  for label, seed in report.diverged:
    logger.error(f'{cfg.experiment}: {label} diverged for seed {seed}; partial outputs kept')
  logger.info(
    f'{cfg.experiment}: {sum(checks.values())}/{len(checks)} checks passed '
    f'in {report.wall_clock:.1f}s'
  )
  if cfg.mlflow:
    from fedcluster.utils.tracking import log_report

    log_report(report)
  return report
