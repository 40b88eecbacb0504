"""Training loops: Federated-, Momentum- and Myopic-Clustering plus the baselines."""

from functools import partial
from typing import Callable

from fedcluster.algorithms.baselines import run_fedavg, run_ground_truth, run_local
from fedcluster.algorithms.clustered_fl import run_clustered_fl
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.federated import run_federated_clustering
from fedcluster.algorithms.ifca import run_hypcluster, run_ifca
from fedcluster.algorithms.momentum import run_momentum_clustering
from fedcluster.algorithms.myopic import run_myopic
from fedcluster.algorithms.records import RunRecord
from fedcluster.errors import ConfigurationError
from fedcluster.problems.instance import ProblemInstance

Trainer = Callable[[ProblemInstance, TrainerConfig], RunRecord]

ALGORITHMS: dict[str, Trainer] = {
  'fc': run_federated_clustering,
  'momentum': run_momentum_clustering,
  'myopic': run_myopic,
  'ifca_i': partial(run_ifca, option='I'),
  'ifca_ii': partial(run_ifca, option='II'),
  'hypcluster': run_hypcluster,
  'cfl': run_clustered_fl,
  'local': run_local,
  'global': run_fedavg,
  'gt': run_ground_truth,
}


def get_algorithm(name: str) -> Trainer:
  """Training loop registered under name."""
  try:
    return ALGORITHMS[name]
  except KeyError:
    raise ConfigurationError(
      f'unknown algorithm {name!r}; expected one of {", ".join(ALGORITHMS)}'
    ) from None


__all__ = [
  'ALGORITHMS',
  'RunRecord',
  'Trainer',
  'TrainerConfig',
  'get_algorithm',
  'run_clustered_fl',
  'run_federated_clustering',
  'run_fedavg',
  'run_ground_truth',
  'run_hypcluster',
  'run_ifca',
  'run_local',
  'run_momentum_clustering',
  'run_myopic',
]
