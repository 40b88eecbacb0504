"""Metric CSVs per (label, seed) and the experiment's summary JSON."""

import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from fedcluster.algorithms.records import METRICS
from fedcluster.experiments.config import ExperimentConfig
from fedcluster.experiments.studies import SeedOutcome

logger = logging.getLogger(__name__)

SUMMARY_FILE = 'summary.json'


def csv_path(cfg: ExperimentConfig, label: str, seed: int) -> Path:
  """Metric CSV of one (label, seed)."""
  return cfg.output_dir / f'{label}_seed{seed}.csv'


def write_seed(cfg: ExperimentConfig, outcome: SeedOutcome) -> list[Path]:
  """Write one CSV per label of a finished seed.

  File names carry the seed, so workers never share a file.
  """
  cfg.output_dir.mkdir(parents=True, exist_ok=True)
  paths = []
  for label in outcome.labels:
    path = csv_path(cfg, label, outcome.seed)
    frame = outcome.frame(label, cfg.experiment)
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    paths.append(path)
  logger.debug(f'seed {outcome.seed}: wrote {len(paths)} files to {cfg.output_dir}')
  return paths


def label_results(outcomes: list[SeedOutcome]) -> dict[str, dict[str, Any]]:
  """Per training label: seed averages of the final honest metrics, messages and time."""
  results = {}
  labels = sorted({label for o in outcomes for label in o.records})
  for label in labels:
    runs = [(o, o.records[label]) for o in outcomes if label in o.records]
    entry: dict[str, Any] = {
      'runs': len(runs),
      'diverged': sum(label in o.diverged for o, _ in runs),
      'messages': float(np.mean([r.total_messages for _, r in runs])),
      'wall_clock': float(np.mean([r.wall_clock for _, r in runs])),
    }
    for metric in METRICS[:-1]:
      finals = [r.final_mean(metric) for _, r in runs if metric in r.metrics]
      if finals:
        entry[f'final_{metric}'] = float(np.mean(finals))
    results[label] = entry
  return results


def _encode(value: Any) -> Any:
  if isinstance(value, np.generic):
    return value.item()
  if isinstance(value, np.ndarray):
    return value.tolist()
  if isinstance(value, Path):
    return str(value)
  raise TypeError(f'cannot serialize {type(value).__name__}')


def _finite(value: Any) -> Any:
  # Non-finite floats become strings so the file stays strict JSON.
  if isinstance(value, float) and not math.isfinite(value):
    return str(value)
  if isinstance(value, dict):
    return {k: _finite(v) for k, v in value.items()}
  if isinstance(value, (list, tuple)):
    return [_finite(v) for v in value]
  return value


def write_summary(cfg: ExperimentConfig, payload: dict[str, Any]) -> Path:
  """Write payload as strict JSON to summary.json."""
  cfg.output_dir.mkdir(parents=True, exist_ok=True)
  path = cfg.output_dir / SUMMARY_FILE
  with open(path, 'w') as f:
    json.dump(_finite(json.loads(json.dumps(payload, default=_encode))), f, indent=2)
  logger.info(f'wrote {path}')
  return path
