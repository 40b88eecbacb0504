"""Diagnostics: assumption estimators, center errors, momentum variance, clustering accuracy."""

from fedcluster.analysis.accuracy import clustering_accuracy
from fedcluster.analysis.assumptions import (
  AssumptionTrace,
  estimate_inter_separation,
  estimate_intra_ratio,
  trace_assumptions,
)
from fedcluster.analysis.center import center_error, elbow_index, oracle_center_error
from fedcluster.analysis.momentum import momentum_variance_probe
from fedcluster.problems.lower_bound import lower_bound_floor

__all__ = [
  'AssumptionTrace',
  'center_error',
  'clustering_accuracy',
  'elbow_index',
  'estimate_inter_separation',
  'estimate_intra_ratio',
  'lower_bound_floor',
  'momentum_variance_probe',
  'oracle_center_error',
  'trace_assumptions',
]
