import numpy as np
import pytest

from fedcluster.core.rng import stream
from fedcluster.errors import PreconditionError
from fedcluster.problems.blobs import blob_centers, make_blobs, min_separation
from fedcluster.problems.lower_bound import make_lower_bound_mixture, sample_mixture
from fedcluster.problems.oracles import GaussianNoiseOracle, QuadraticOracle


def test_zero_sigma_points_sit_on_centers():
  blobs = make_blobs(2, 5, 0.0, centers=[[0.0, 0.0], [3.0, 4.0]], seed=1)
  np.testing.assert_array_equal(blobs.points[:5], np.zeros((5, 2)))
  np.testing.assert_array_equal(blobs.points[5:], np.tile([3.0, 4.0], (5, 1)))
  assert blobs.params.delta == 5.0
  assert blobs.labels.tolist() == [0] * 5 + [1] * 5


def test_sample_mean_near_center():
  blobs = make_blobs(1, 10_000, 1.0, centers=[[2.0, -1.0]], seed=4)
  assert np.all(np.abs(blobs.points.mean(axis=0) - [2.0, -1.0]) < 0.05)


def test_paper_sized_configuration():
  for sigma in (0.5, 1, 2, 4):
    blobs = make_blobs(10, 9, sigma, seed=0, d=10)
    assert blobs.points.shape == (90, 10)
    assert blobs.params.sigma == pytest.approx(sigma * np.sqrt(10))
    assert np.all(np.abs(blobs.centers) <= 10)


def test_min_separation():
  assert min_separation(np.array([[0.0], [1.0], [5.0]])) == 1.0
  assert min_separation(blob_centers(1, 3, 0)) == 0.0


def test_mixture_degenerates_without_noise():
  mixture = make_lower_bound_mixture(0.0, 2.0)
  assert mixture.p == 0.0
  assert mixture.floor == 0.0


def test_mixture_at_boundary_condition():
  mixture = make_lower_bound_mixture(1.0, np.sqrt(2.0))
  assert mixture.p == pytest.approx(0.5 - 1 / (2 * np.sqrt(3)))


def test_mixture_gap_and_variance():
  mixture = make_lower_bound_mixture(1.0, 2.0)
  mu1, mu2 = mixture.means
  assert mu2 - mu1 == pytest.approx(2.0)
  assert mixture.first.variance == pytest.approx(1.0)
  assert mixture.second.variance == pytest.approx(1.0)
  assert mixture.floor == pytest.approx(1 / 16)


def test_mixture_precondition():
  with pytest.raises(PreconditionError):
    make_lower_bound_mixture(1.0, 1.0)


def test_sample_mixture_shapes():
  points, labels = sample_mixture(make_lower_bound_mixture(1.0, 2.0), 50, stream(0))
  assert points.shape == (100, 1)
  assert labels.sum() == 50


def test_gaussian_noise_oracle_total_variance():
  oracle = GaussianNoiseOracle(QuadraticOracle(np.zeros(4)), sigma=2.0)
  x = np.ones(4)
  draws = np.stack([oracle.stoch_grad(x, 2, stream(0, round=r)) for r in range(10_000)])
  assert draws.var(axis=0).sum() == pytest.approx(4.0 / 2, rel=0.1)
  np.testing.assert_allclose(draws.mean(axis=0), x, atol=0.05)
