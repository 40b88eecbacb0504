import numpy as np
import pandas as pd
import pytest

from fedcluster.core.rng import stream
from fedcluster.errors import ConfigurationError, PreconditionError
from fedcluster.problems.oracles import RegressionOracle
from fedcluster.problems.regression import dump_problem_csv, make_synthetic_regression


def test_defaults_and_shared_optima():
  problem = make_synthetic_regression(seed=3)
  assert problem.n_clients == 300
  assert problem.n_clusters == 4
  assert problem.dim == 10
  for client, label in zip(problem.clients, problem.true_labels):
    optimum = problem.true_optima[label]
    assert client.dataset_size == 9
    np.testing.assert_allclose(client.grad(optimum), 0.0, atol=1e-10)
    assert client.value(optimum) == pytest.approx(0.0, abs=1e-20)


def test_theory_params_are_consistent():
  params = make_synthetic_regression(K=2, n_i=5, seed=1).params
  assert params.L >= params.mu > 0
  assert params.delta > 0
  assert params.delta_i == 0.5


def test_requires_underdetermined_local_systems():
  with pytest.raises(PreconditionError):
    make_synthetic_regression(d=9, n=9)


def test_reproducible_from_seed():
  a = make_synthetic_regression(K=2, n_i=3, seed=7)
  b = make_synthetic_regression(K=2, n_i=3, seed=7)
  for x, y in zip(a.clients, b.clients):
    assert np.array_equal(x.features, y.features)


def test_one_sample_hand_computation():
  oracle = RegressionOracle(np.array([[2.0]]), np.array([2.0 * 0.5]))
  x = np.array([1.25])
  assert oracle.value(x) == pytest.approx(2 * (1.25 - 0.5) ** 2)
  assert oracle.grad(x)[0] == pytest.approx(4 * (1.25 - 0.5))


def test_population_loss_formula():
  optimum = np.array([0.5, -1.0])
  oracle = RegressionOracle(np.ones((2, 1)), np.array([0.0]), optimum=optimum, feature_mean=3)
  e = np.array([1.0, 2.0])
  expected = 0.5 * (1 + 4) + 0.5 * 9 * 3**2
  assert oracle.test_value(optimum + e) == pytest.approx(expected)


def test_population_loss_of_runaway_model_is_inf():
  problem = make_synthetic_regression(K=2, n_i=2, seed=0)
  oracle = problem.clients[-1]
  assert oracle.test_value(1e154 * np.ones(10)) == float('inf')
  assert oracle.test_value(-1e154 * np.ones(10)) == float('inf')


def _large_oracle():
  rng = stream(11, purpose='test/features')
  features = rng.normal(size=(3, 400))
  targets = rng.normal(size=400)
  return RegressionOracle(features, targets)


def test_stochastic_gradient_is_unbiased():
  oracle = _large_oracle()
  x = np.array([0.3, -0.2, 1.0])
  rng = stream(5, purpose='test/unbiased')
  batch = 4
  draws = np.stack([oracle.stoch_grad(x, batch, rng) for _ in range(100_000)])
  sigma = draws.std(axis=0) * np.sqrt(batch)
  tolerance = 5 * sigma / np.sqrt(100_000 * batch)
  assert np.all(np.abs(draws.mean(axis=0) - oracle.grad(x)) <= tolerance)


def test_batch_reduces_variance():
  oracle = _large_oracle()
  x = np.array([0.3, -0.2, 1.0])
  single = np.stack([oracle.stoch_grad(x, 1, stream(1, round=r)) for r in range(10_000)])
  batched = np.stack([oracle.stoch_grad(x, 4, stream(2, round=r)) for r in range(10_000)])
  ratio = batched.var(axis=0).sum() / (single.var(axis=0).sum() / 4)
  assert 0.8 <= ratio <= 1.2


def test_full_batch_is_exact_and_oversize_rejected():
  oracle = _large_oracle()
  x = np.zeros(3)
  assert np.array_equal(oracle.stoch_grad(x, 400, stream(0)), oracle.grad(x))
  with pytest.raises(ConfigurationError):
    oracle.stoch_grad(x, 401, stream(0))


def test_grad_many_matches_rowwise():
  oracle = _large_oracle()
  xs = stream(3).normal(size=(5, 3))
  np.testing.assert_allclose(oracle.grad_many(xs), np.stack([oracle.grad(x) for x in xs]))


def test_dump_problem_csv(tmp_path):
  problem = make_synthetic_regression(K=2, n_i=2, d=3, n=2, seed=0)
  path = dump_problem_csv(problem, tmp_path / 'data.csv')
  frame = pd.read_csv(path)
  assert list(frame.columns) == ['client_id', 'cluster_id', 'x0', 'x1', 'x2', 'target']
  assert len(frame) == 4 * 2
  assert frame['cluster_id'].tolist() == [0, 0, 0, 0, 1, 1, 1, 1]
