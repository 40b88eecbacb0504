import numpy as np
import pytest

from fedcluster.algorithms.baselines import run_local
from fedcluster.algorithms.common import TrainingContext
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.federated import exchange_gradients, run_federated_clustering
from fedcluster.attacks.schedule import ByzantineSchedule
from fedcluster.clustering.radius import FixedRadius, PercentileRadius
from fedcluster.errors import DivergenceError
from fedcluster.problems.examples import make_example1, make_example2
from fedcluster.problems.instance import ProblemInstance
from fedcluster.problems.oracles import QuadraticOracle
from fedcluster.problems.regression import make_synthetic_regression


def _small_regression(seed=0):
  return make_synthetic_regression(K=2, n_i=4, d=10, n=9, seed=seed)


def test_example1_all_pairs_gradients():
  eta = 0.5
  problem = make_example1(eta)
  ctx = TrainingContext('fc', problem, TrainerConfig(eta=eta))
  table = exchange_gradients(ctx, np.ones((3, 1)), 1)
  np.testing.assert_allclose(table[:, 0, 0], [1 / (3 * eta), 0.0, -1 / eta])


def test_example1_recovers_client2():
  problem = make_example1(0.1)
  cfg = TrainerConfig(eta=0.1, rounds=200, clustering_rounds=10, radius=FixedRadius(tau=5.0))
  record = run_federated_clustering(problem, cfg)
  x = record.final_params[:, 0]
  assert abs(x[1]) <= 1e-3
  assert x[2] == 2.0
  assert record.partition == [[0, 1], [2]]


def test_example2_converges_to_both_optima():
  cfg = TrainerConfig(eta=0.1, rounds=200, radius=FixedRadius(tau=1.0))
  record = run_federated_clustering(make_example2(), cfg)
  np.testing.assert_allclose(record.final_params[:, 0], [-0.5, 0.5], atol=1e-4)
  assert record.partition == [[0], [1]]


def test_single_client_is_gradient_descent():
  oracle = QuadraticOracle(np.array([1.0, -2.0]), np.diag([1.0, 3.0]))
  problem = ProblemInstance('one', [oracle], [0], initial_params=np.array([4.0, 4.0]))
  cfg = TrainerConfig(eta=0.2, rounds=25)
  record = run_federated_clustering(problem, cfg)
  x = problem.initial_params.copy()
  for _ in range(25):
    x = x - 0.2 * oracle.grad(x)
  assert np.array_equal(record.final_params[0], x)


def test_zero_radius_reduces_to_local():
  problem = _small_regression()
  cfg = TrainerConfig(eta=0.01, rounds=15, batch_size=3, radius=FixedRadius(tau=0.0), seed=4)
  fc = run_federated_clustering(problem, cfg)
  local = run_local(problem, cfg)
  assert np.array_equal(fc.final_params, local.final_params)
  assert np.array_equal(fc.series('loss'), local.series('loss'))


def test_infinite_radius_one_round_is_mean_gradient():
  problem = _small_regression(1)
  cfg = TrainerConfig(eta=0.01, rounds=1, radius=FixedRadius(tau=float('inf')))
  record = run_federated_clustering(problem, cfg)
  x0 = problem.initial_params
  expected = x0 - 0.01 * np.mean([oracle.grad(x0) for oracle in problem.clients], axis=0)
  np.testing.assert_allclose(
    record.final_params, np.tile(expected, (8, 1)), rtol=1e-12, atol=1e-12
  )


def test_permutation_invariance():
  problem = _small_regression(2)
  cfg = TrainerConfig(eta=0.01, rounds=5, batch_size=3, radius=PercentileRadius(p=30), seed=9)
  order = [5, 2, 7, 0, 1, 6, 3, 4]
  base = run_federated_clustering(problem, cfg)
  moved = run_federated_clustering(problem.permuted(order), cfg)
  assert np.array_equal(moved.final_params, base.final_params[order])
  assert np.array_equal(moved.series('loss'), base.series('loss')[:, order])


def test_zero_beta_is_a_no_op():
  problem = _small_regression(3)
  cfg = TrainerConfig(eta=0.01, rounds=5, batch_size=3, seed=1)
  attacked = cfg.model_copy(update={'byzantine': ByzantineSchedule(beta=0.0, kind='sign_flip')})
  base = run_federated_clustering(problem, cfg).to_frame('x')
  same = run_federated_clustering(problem, attacked).to_frame('x')
  assert base.equals(same)


def test_messages_are_counted_per_round():
  record = run_federated_clustering(make_example2(), TrainerConfig(eta=0.1, rounds=3))
  assert record.messages == [0, 4, 4, 4]


def test_sparse_evaluation_keeps_training_and_message_totals():
  problem = make_example2()
  every_round = run_federated_clustering(problem, TrainerConfig(eta=0.1, rounds=5))
  sparse = run_federated_clustering(problem, TrainerConfig(eta=0.1, rounds=5, eval_every=2))
  assert sparse.rounds == [0, 2, 4, 5]
  assert sparse.messages == [0, 8, 8, 4]
  assert sparse.total_messages == every_round.total_messages == 20
  assert np.array_equal(sparse.final_params, every_round.final_params)
  np.testing.assert_array_equal(sparse.series('loss'), every_round.series('loss')[[0, 2, 4, 5]])


def test_divergence_raises_with_partial_record():
  oracle = QuadraticOracle(np.zeros(1), 1.0)
  problem = ProblemInstance('blowup', [oracle, oracle], [0, 0], initial_params=np.ones(1))
  cfg = TrainerConfig(eta=1e200, rounds=10, radius=FixedRadius(tau=float('inf')))
  with pytest.raises(DivergenceError) as info:
    run_federated_clustering(problem, cfg)
  assert info.value.algorithm == 'fc'
  assert info.value.partial.rounds[0] == 0

  record = run_federated_clustering(problem, cfg.model_copy(update={'halt_on_divergence': False}))
  assert record.diverged
  assert np.isinf(record.final_mean('loss'))


@pytest.mark.slow
def test_more_clients_per_cluster_lowers_time_averaged_gradient_norm():
  wins = 0
  seeds = range(50)
  for seed in seeds:
    averages = []
    for n_i in (4, 16):
      problem = make_synthetic_regression(K=2, n_i=n_i, d=10, n=9, seed=seed)
      cfg = TrainerConfig(
        eta=1 / problem.params.L,
        rounds=300,
        radius=PercentileRadius(p=15),
        seed=seed,
      )
      averages.append(run_federated_clustering(problem, cfg).time_average().mean())
    wins += averages[1] < averages[0]
  assert wins >= 0.9 * len(seeds)
