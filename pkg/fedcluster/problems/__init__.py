"""Problem constructors: counter-examples, regression, blobs and the lower-bound mixture."""

from fedcluster.problems.blobs import BlobSet, blob_centers, make_blobs, min_separation
from fedcluster.problems.examples import make_example1, make_example2, make_example3
from fedcluster.problems.instance import ProblemInstance, TheoryParams
from fedcluster.problems.lower_bound import (
  LowerBoundMixture,
  lower_bound_floor,
  make_lower_bound_mixture,
  sample_mixture,
)
from fedcluster.problems.oracles import (
  AnalyticOracle,
  GaussianNoiseOracle,
  LossOracle,
  QuadraticOracle,
  RegressionOracle,
  TwoPointGradientOracle,
)
from fedcluster.problems.regression import dump_problem_csv, make_synthetic_regression

__all__ = [
  'AnalyticOracle',
  'BlobSet',
  'GaussianNoiseOracle',
  'LossOracle',
  'LowerBoundMixture',
  'ProblemInstance',
  'QuadraticOracle',
  'RegressionOracle',
  'TheoryParams',
  'TwoPointGradientOracle',
  'blob_centers',
  'dump_problem_csv',
  'lower_bound_floor',
  'make_blobs',
  'make_example1',
  'make_example2',
  'make_example3',
  'make_lower_bound_mixture',
  'make_synthetic_regression',
  'min_separation',
  'sample_mixture',
]
