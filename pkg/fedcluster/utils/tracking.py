"""Optional MLflow logging of experiment runs."""

import logging
import math
import os
from typing import TYPE_CHECKING

if TYPE_CHECKING:
  from fedcluster.experiments.runner import ExperimentReport

logger = logging.getLogger(__name__)

DEFAULT_EXPERIMENT = 'fedcluster'


def get_mlflow_experiment_name() -> str:
  """MLFLOW_EXPERIMENT_NAME, or the package default."""
  return os.environ.get('MLFLOW_EXPERIMENT_NAME', DEFAULT_EXPERIMENT)


def _finite_metrics(metrics: dict[str, float]) -> dict[str, float]:
  return {k: float(v) for k, v in metrics.items() if math.isfinite(v)}


def log_report(report: 'ExperimentReport') -> None:
  """One MLflow run per (label, seed) plus a summary run with the checks.

  Tracking goes to MLFLOW_TRACKING_URI (mlflow's own default when unset).
  """
  import mlflow

  cfg = report.config
  mlflow.set_experiment(get_mlflow_experiment_name())
  for outcome in report.outcomes:
    for label, record in outcome.records.items():
      with mlflow.start_run(run_name=f'{cfg.experiment}/{label}/seed{outcome.seed}'):
        mlflow.log_params(
          {
            'experiment': cfg.experiment,
            'algorithm': record.algorithm,
            'label': label,
            'seed': outcome.seed,
            'problem': record.problem,
            **{f'trainer.{k}': v for k, v in cfg.trainer.items()},
            **{f'override.{k}': v for k, v in cfg.overrides.get(record.algorithm, {}).items()},
          }
        )
        metrics = {
          f'final_{m}': record.final_mean(m) for m in ('loss', 'test_loss') if m in record.metrics
        }
        metrics['messages'] = record.total_messages
        metrics['wall_clock'] = record.wall_clock
        mlflow.log_metrics(_finite_metrics(metrics))
        path = report.csv_path(label, outcome.seed)
        if path.is_file():
          mlflow.log_artifact(str(path))
  with mlflow.start_run(run_name=f'{cfg.experiment}/summary'):
    mlflow.log_params({'experiment': cfg.experiment, 'seeds': len(cfg.seeds)})
    mlflow.log_metrics({f'check.{k}': float(v) for k, v in report.checks.items()})
    mlflow.log_dict(report.to_dict(), 'summary.json')
  logger.info(f'logged {cfg.experiment} to MLflow experiment {get_mlflow_experiment_name()}')
