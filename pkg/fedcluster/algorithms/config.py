"""Training hyperparameters shared by every training loop."""

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from fedcluster.attacks.schedule import ByzantineSchedule
from fedcluster.clustering.radius import PercentileRadius, RadiusPolicy, parse_radius
from fedcluster.errors import ConfigurationError
from fedcluster.problems.instance import ProblemInstance


class TrainerConfig(BaseModel):
  """Hyperparameters of one training run.

  Attributes:
    eta: Learning rate.
    rounds: Number of communication rounds T.
    clustering_rounds: Threshold-Clustering iterations l per round.
    radius: Thresholding radius policy.
    batch_size: Stochastic batch size; None uses exact gradients.
    alpha: Momentum parameter (Momentum-Clustering only).
    n_clusters: Number of clusters for server-side variants; defaults to the problem's K.
    seed: Root seed of every random stream of the run.
    local_steps: Local steps per round (IFCA Option II and HypCluster).
    ifca_option: 'I' averages gradients, 'II' averages locally trained models.
    split_tolerance: Clustered-FL stops splitting a group whose gradient spread is below this.
    max_clusters: Clustered-FL stops once this many groups exist; defaults to the problem's K.
    fedavg_rounds: Iteration cap of the Clustered-FL FedAvg sub-run.
    fedavg_tolerance: Squared gradient norm at which that sub-run counts as converged.
    cfl_anchor: 'fedavg' trains to the FedAvg optimum before the first split; 'reference' uses
      the problem's reference point.
    partition_tolerance: Clients whose assigned centers lie this close share a reported group.
    track_center_error: Record ||x_i - x*_k||^2 when the problem knows its optima.
    keep_trajectory: Keep the parameters of every recorded round in the record.
    eval_every: Record metrics every this many rounds; the last round is always recorded.
    halt_on_divergence: Raise on non-finite parameters instead of recording and stopping.
    byzantine: Which clients attack and how.
  """

  eta: float = Field(gt=0)
  rounds: int = Field(100, ge=1)
  clustering_rounds: int = Field(10, ge=1)
  radius: RadiusPolicy = Field(default_factory=lambda: PercentileRadius(p=20))
  batch_size: Optional[int] = Field(None, ge=1)
  alpha: float = Field(1.0, gt=0, le=1)
  n_clusters: Optional[int] = Field(None, ge=1)
  seed: int = Field(0, ge=0)
  local_steps: int = Field(1, ge=1)
  ifca_option: Literal['I', 'II'] = 'I'
  split_tolerance: float = Field(1e-3, gt=0)
  max_clusters: Optional[int] = Field(None, ge=1)
  fedavg_rounds: int = Field(1000, ge=1)
  fedavg_tolerance: float = Field(1e-8, gt=0)
  cfl_anchor: Literal['fedavg', 'reference'] = 'fedavg'
  partition_tolerance: float = Field(1e-6, ge=0)
  track_center_error: bool = True
  keep_trajectory: bool = False
  eval_every: int = Field(1, ge=1)
  halt_on_divergence: bool = True
  byzantine: ByzantineSchedule = Field(default_factory=ByzantineSchedule)

  @field_validator('radius', mode='before')
  @classmethod
  def _parse_radius(cls, value):
    return parse_radius(value) if isinstance(value, str) else value

  def clusters_for(self, problem: ProblemInstance) -> int:
    """K for server-side clustering: the configured value, else the problem's."""
    k = self.n_clusters if self.n_clusters is not None else problem.n_clusters
    if k > problem.n_clients:
      raise ConfigurationError(f'K={k} exceeds the {problem.n_clients} clients of {problem.name}')
    return k
