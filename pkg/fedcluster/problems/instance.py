"""Problem instances: a client population with ground-truth clustering and theory constants."""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fedcluster.core.ids import ClusterId, validate_labels
from fedcluster.core.vector import Vector
from fedcluster.errors import ConfigurationError, DimensionMismatchError
from fedcluster.problems.oracles import LossOracle


class TheoryParams(BaseModel):
  """Constants of the clustering and convergence assumptions (0 when unknown)."""

  sigma: float = Field(0.0, ge=0, description='within-cluster standard deviation')
  delta: float = Field(0.0, ge=0, description='inter-cluster separation')
  delta_i: float = Field(1.0, ge=0, le=1, description='fraction of clients in own cluster')
  beta_i: float = Field(0.0, ge=0, le=1, description='malicious fraction')
  A: float = Field(0.0, ge=0)
  D: float = Field(0.0, ge=0)
  L: float = Field(0.0, ge=0)
  mu: float = Field(0.0, ge=0)

  @model_validator(mode='after')
  def _smoothness_dominates(self) -> 'TheoryParams':
    if self.L < self.mu:
      raise ValueError(f'L={self.L} must be at least mu={self.mu}')
    return self


@dataclass(frozen=True)
class ProblemInstance:
  """A population of clients with known cluster structure.

  Attributes:
    name: Short identifier used in logs and outputs.
    clients: One oracle per client.
    true_labels: Ground-truth cluster of every client.
    params: Theory constants recorded at construction.
    initial_params: Common starting point x_0 for every client.
    cluster_inits: Optional per-cluster starting models for loss-based baselines.
    true_optima: Optional per-cluster optimum, used for center-error metrics.
    reference_point: Optional point at which a split should be evaluated instead of a trained
      FedAvg optimum.
    data_keys: Stable identity of each client's data, used to key random streams.
  """

  name: str
  clients: list[LossOracle]
  true_labels: list[ClusterId]
  params: TheoryParams = field(default_factory=TheoryParams)
  initial_params: Optional[Vector] = None
  cluster_inits: Optional[list[Vector]] = None
  true_optima: Optional[list[Vector]] = None
  reference_point: Optional[Vector] = None
  data_keys: Optional[list[int]] = None

  def __post_init__(self):
    if len(self.clients) != len(self.true_labels):
      raise ConfigurationError(
        f'{len(self.clients)} clients but {len(self.true_labels)} labels'
      )
    object.__setattr__(self, 'true_labels', validate_labels(self.true_labels))
    dims = {oracle.dim for oracle in self.clients}
    if len(dims) != 1:
      raise DimensionMismatchError(f'clients disagree on dimension: {sorted(dims)}')
    if self.initial_params is None:
      object.__setattr__(self, 'initial_params', np.zeros(self.dim))
    if self.data_keys is None:
      object.__setattr__(self, 'data_keys', list(range(self.n_clients)))
    if len(set(self.data_keys)) != self.n_clients:
      raise ConfigurationError('data keys must be unique per client')

  @property
  def n_clients(self) -> int:
    """N."""
    return len(self.clients)

  @property
  def n_clusters(self) -> int:
    """Number of distinct true labels."""
    return len(set(self.true_labels))

  @property
  def dim(self) -> int:
    """Parameter dimension d."""
    return self.clients[0].dim

  @property
  def has_values(self) -> bool:
    """True when every client exposes loss values."""
    return all(oracle.has_value for oracle in self.clients)

  def members(self, cluster: int) -> list[int]:
    """Client indices whose true label is cluster."""
    return [i for i, label in enumerate(self.true_labels) if label == cluster]

  def permuted(self, order: Sequence[int]) -> 'ProblemInstance':
    """Relabel clients: new client j is old client order[j]. Data keys travel with the data."""
    order = list(order)
    if sorted(order) != list(range(self.n_clients)):
      raise ConfigurationError('order must be a permutation of the client indices')
    return replace(
      self,
      clients=[self.clients[i] for i in order],
      true_labels=[self.true_labels[i] for i in order],
      data_keys=[self.data_keys[i] for i in order],
    )
