"""Vectors, random streams and identifiers shared by every other module."""

from fedcluster.core.ids import ClientId, ClusterId, validate_labels, validate_population
from fedcluster.core.rng import RngStream, purpose_key, stream
from fedcluster.core.vector import (
  Vector,
  as_points,
  as_vector,
  canonical_sum,
  mean,
  squared_distance,
  squared_distances,
)

__all__ = [
  'ClientId',
  'ClusterId',
  'RngStream',
  'Vector',
  'as_points',
  'as_vector',
  'canonical_sum',
  'mean',
  'purpose_key',
  'squared_distance',
  'squared_distances',
  'stream',
  'validate_labels',
  'validate_population',
]
