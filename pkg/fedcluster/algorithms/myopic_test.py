import numpy as np

from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.myopic import run_myopic
from fedcluster.clustering.radius import PercentileRadius
from fedcluster.problems.examples import make_example1
from fedcluster.problems.instance import ProblemInstance
from fedcluster.problems.oracles import QuadraticOracle


def test_example1_client2_stuck_at_saddle():
  problem = make_example1(0.5)
  cfg = TrainerConfig(eta=0.5, rounds=200, radius=PercentileRadius(p=20))
  record = run_myopic(problem, cfg)
  x = record.final_params[:, 0]
  assert abs(x[0]) <= 1e-3
  assert x[1] == 1.0
  assert x[2] == 2.0
  assert record.partition == [[0, 1, 2]]
  assert record.messages[1:] == [6] * 200


def test_identical_clients_share_params_every_round():
  oracle = QuadraticOracle(np.array([1.0, 2.0]), 2.0)
  problem = ProblemInstance('same', [oracle] * 4, [0] * 4, initial_params=np.zeros(2))
  cfg = TrainerConfig(eta=0.1, rounds=20, keep_trajectory=True)
  record = run_myopic(problem, cfg)
  for params in record.trajectory:
    assert np.all(params == params[0])
