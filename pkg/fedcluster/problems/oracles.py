"""Per-client loss oracles.

An oracle answers loss, exact-gradient and stochastic-gradient queries for one client. Analytic
oracles have zero gradient noise; data-backed oracles sample a batch of their own data.
"""

from abc import ABC, abstractmethod
from typing import Callable, Optional

try:
  from typing import override
except ImportError:  # Python < 3.12
  from typing_extensions import override

import numpy as np
import numpy.typing as npt

from fedcluster.core.rng import RngStream
from fedcluster.core.vector import Vector
from fedcluster.errors import ConfigurationError, DimensionMismatchError

Generator = np.random.Generator


def _generator(rng: RngStream | Generator) -> Generator:
  return rng.generator() if isinstance(rng, RngStream) else rng


class LossOracle(ABC):
  """Loss, gradient and stochastic gradient of one client's objective."""

  dim: int
  # None for analytic oracles, otherwise the number of local samples m_i.
  dataset_size: Optional[int] = None
  has_value: bool = True

  @abstractmethod
  def grad(self, x: Vector) -> Vector:
    """Exact (expected) gradient at x."""

  def value(self, x: Vector) -> float:
    """Loss at x."""
    raise ConfigurationError(f'{type(self).__name__} exposes gradients only, no loss values')

  def test_value(self, x: Vector) -> float:
    """Held-out loss at x. Defaults to the training loss."""
    return self.value(x)

  def stoch_grad(self, x: Vector, batch_size: int, rng: RngStream | Generator) -> Vector:
    """Stochastic gradient averaged over a batch. Analytic oracles return the exact gradient."""
    _check_batch(batch_size)
    return self.grad(x)

  def grad_many(self, xs: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Exact gradients at every row of xs."""
    return np.stack([self.grad(x) for x in xs])

  def _check_dim(self, x: Vector) -> None:
    if np.shape(x) != (self.dim,):
      raise DimensionMismatchError(f'expected a {self.dim}-dim point, got shape {np.shape(x)}')


def _check_batch(batch_size: int) -> None:
  if batch_size < 1:
    raise ConfigurationError(f'batch size must be positive, got {batch_size}')


class AnalyticOracle(LossOracle):
  """Closed-form loss and gradient, no noise."""

  def __init__(
    self,
    grad_fn: Callable[[Vector], Vector],
    value_fn: Optional[Callable[[Vector], float]] = None,
    dim: int = 1,
    name: str = 'analytic',
  ):
    self.dim = dim
    self.name = name
    self._grad_fn = grad_fn
    self._value_fn = value_fn
    self.has_value = value_fn is not None

  @override
  def grad(self, x: Vector) -> Vector:
    self._check_dim(x)
    return np.asarray(self._grad_fn(x), dtype=np.float64).reshape(self.dim)

  @override
  def value(self, x: Vector) -> float:
    if self._value_fn is None:
      return super().value(x)
    self._check_dim(x)
    return float(self._value_fn(x))


class QuadraticOracle(LossOracle):
  """f(x) = 1/2 (x - x*)^T H (x - x*)."""

  def __init__(self, optimum: Vector, curvature: npt.ArrayLike | float = 1.0):
    self.optimum = np.asarray(optimum, dtype=np.float64)
    self.dim = self.optimum.shape[0]
    curvature = np.asarray(curvature, dtype=np.float64)
    self.hessian = curvature * np.eye(self.dim) if curvature.ndim == 0 else curvature
    if self.hessian.shape != (self.dim, self.dim):
      raise DimensionMismatchError(f'curvature must be {self.dim}x{self.dim}')

  @override
  def value(self, x: Vector) -> float:
    self._check_dim(x)
    e = x - self.optimum
    return 0.5 * float(e @ self.hessian @ e)

  @override
  def grad(self, x: Vector) -> Vector:
    self._check_dim(x)
    return self.hessian @ (x - self.optimum)


class GaussianNoiseOracle(LossOracle):
  """Adds isotropic Gaussian noise of total variance sigma^2 / |B| to another oracle's gradient."""

  def __init__(self, base: LossOracle, sigma: float):
    if sigma < 0:
      raise ConfigurationError(f'sigma must be nonnegative, got {sigma}')
    self.base = base
    self.sigma = float(sigma)
    self.dim = base.dim
    self.has_value = base.has_value

  @override
  def value(self, x: Vector) -> float:
    return self.base.value(x)

  @override
  def test_value(self, x: Vector) -> float:
    return self.base.test_value(x)

  @override
  def grad(self, x: Vector) -> Vector:
    return self.base.grad(x)

  @override
  def stoch_grad(self, x: Vector, batch_size: int, rng: RngStream | Generator) -> Vector:
    _check_batch(batch_size)
    scale = self.sigma / np.sqrt(self.dim * batch_size)
    return self.base.grad(x) + _generator(rng).normal(0.0, scale, size=self.dim)


class TwoPointGradientOracle(LossOracle):
  """Gradient-only oracle returning x - a with a drawn uniformly from a finite set of shifts.

  Scalar problems only. The exact gradient is the expectation x - mean(shifts).
  """

  has_value = False

  def __init__(self, shifts: tuple[float, ...] = (0.0, 1.0)):
    self.shifts = np.asarray(shifts, dtype=np.float64)
    self.dim = 1

  @override
  def grad(self, x: Vector) -> Vector:
    self._check_dim(x)
    return x - self.shifts.mean()

  @override
  def stoch_grad(self, x: Vector, batch_size: int, rng: RngStream | Generator) -> Vector:
    _check_batch(batch_size)
    self._check_dim(x)
    draws = _generator(rng).integers(0, self.shifts.shape[0], size=batch_size)
    return x - self.shifts[draws].mean()


class RegressionOracle(LossOracle):
  """f(x) = ||A^T x - y||^2 / (2n) over a d x n feature matrix A.

  Stochastic gradients use a batch sampled uniformly without replacement from the n columns.
  When the generating optimum and feature mean are attached, test_value is the exact population
  loss E_a 1/2 (a^T(x - x*))^2 for a ~ N(mean * 1, I).
  """

  def __init__(
    self,
    features: npt.NDArray[np.float64],
    targets: npt.NDArray[np.float64],
    optimum: Optional[Vector] = None,
    feature_mean: Optional[float] = None,
  ):
    self.features = np.asarray(features, dtype=np.float64)
    self.targets = np.asarray(targets, dtype=np.float64)
    self.dim, self.dataset_size = self.features.shape
    if self.targets.shape != (self.dataset_size,):
      raise DimensionMismatchError(
        f'targets must have {self.dataset_size} entries, got {self.targets.shape}'
      )
    self.optimum = optimum
    self.feature_mean = feature_mean

  @property
  def hessian(self) -> npt.NDArray[np.float64]:
    """Sample second-moment matrix A A^T / n."""
    return self.features @ self.features.T / self.dataset_size

  @override
  def value(self, x: Vector) -> float:
    self._check_dim(x)
    residual = self.features.T @ x - self.targets
    return float(residual @ residual) / (2 * self.dataset_size)

  @override
  def test_value(self, x: Vector) -> float:
    if self.optimum is None or self.feature_mean is None:
      return self.value(x)
    # Runaway models evaluate to inf, leaving divergence to the training loop.
    with np.errstate(over='ignore', invalid='ignore'):
      e = x - self.optimum
      return float(0.5 * (e @ e) + 0.5 * self.feature_mean**2 * np.square(e.sum()))

  @override
  def grad(self, x: Vector) -> Vector:
    self._check_dim(x)
    return self.features @ (self.features.T @ x - self.targets) / self.dataset_size

  @override
  def grad_many(self, xs: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    residuals = xs @ self.features - self.targets
    return residuals @ self.features.T / self.dataset_size

  @override
  def stoch_grad(self, x: Vector, batch_size: int, rng: RngStream | Generator) -> Vector:
    _check_batch(batch_size)
    self._check_dim(x)
    if batch_size > self.dataset_size:
      raise ConfigurationError(
        f'batch size {batch_size} exceeds the {self.dataset_size} local samples'
      )
    if batch_size == self.dataset_size:
      return self.grad(x)
    batch = np.sort(_generator(rng).choice(self.dataset_size, size=batch_size, replace=False))
    a = self.features[:, batch]
    return a @ (a.T @ x - self.targets[batch]) / batch_size
