"""Client and cluster identifiers."""

from typing import NewType, Sequence

from fedcluster.errors import ConfigurationError

ClientId = NewType('ClientId', int)
ClusterId = NewType('ClusterId', int)


def validate_population(n_clients: int, n_clusters: int) -> None:
  """Check 1 <= K <= N."""
  if n_clients < 1:
    raise ConfigurationError(f'need at least one client, got N={n_clients}')
  if n_clusters < 1:
    raise ConfigurationError(f'need at least one cluster, got K={n_clusters}')
  if n_clusters > n_clients:
    raise ConfigurationError(f'K={n_clusters} exceeds N={n_clients}')


def validate_labels(labels: Sequence[int], n_clusters: int | None = None) -> list[ClusterId]:
  """Labels must be integers in [0, K) covering exactly K distinct values."""
  values = [ClusterId(int(label)) for label in labels]
  if not values:
    raise ConfigurationError('label list is empty')
  k = n_clusters if n_clusters is not None else max(values) + 1
  if any(v < 0 or v >= k for v in values):
    raise ConfigurationError(f'labels must lie in [0, {k})')
  if len(set(values)) != k:
    raise ConfigurationError(f'labels cover {len(set(values))} distinct values, expected {k}')
  return values
