"""Threshold-Clustering, radius policies and reporting assignments."""

from fedcluster.clustering.assignment import (
  Partition,
  assign_clusters,
  format_partition,
  labels_from_partition,
  partition_from_labels,
  partition_from_vectors,
)
from fedcluster.clustering.radius import (
  FixedRadius,
  PercentileRadius,
  RadiusPolicy,
  TheoryScaledRadius,
  parse_radius,
  percentile_radius,
  percentile_squared_radii,
)
from fedcluster.clustering.threshold import (
  BatchState,
  CenterState,
  clip_point,
  farthest_first_inits,
  run_threshold_clustering,
  threshold_clustering_batch,
  threshold_update,
)

__all__ = [
  'BatchState',
  'CenterState',
  'FixedRadius',
  'Partition',
  'PercentileRadius',
  'RadiusPolicy',
  'TheoryScaledRadius',
  'assign_clusters',
  'clip_point',
  'farthest_first_inits',
  'format_partition',
  'labels_from_partition',
  'parse_radius',
  'partition_from_labels',
  'partition_from_vectors',
  'percentile_radius',
  'percentile_squared_radii',
  'run_threshold_clustering',
  'threshold_clustering_batch',
  'threshold_update',
]
