"""Experiment catalog, configuration, runner and outputs."""

from fedcluster.experiments.catalog import EXPERIMENTS, Experiment, get_experiment
from fedcluster.experiments.config import ExperimentConfig, load_config, merge_config
from fedcluster.experiments.runner import ExperimentReport, run_experiment

__all__ = [
  'EXPERIMENTS',
  'Experiment',
  'ExperimentConfig',
  'ExperimentReport',
  'get_experiment',
  'load_config',
  'merge_config',
  'run_experiment',
]
