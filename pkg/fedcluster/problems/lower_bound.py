"""Two-point mixtures that no center estimator can separate below sigma^4 / (4 Delta^2)."""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from fedcluster.errors import PreconditionError


@dataclass(frozen=True)
class TwoPointMixture:
  """Scalar law on {0, delta} taking delta with probability p_high."""

  delta: float
  p_high: float

  @property
  def mean(self) -> float:
    """E z."""
    return self.delta * self.p_high

  @property
  def variance(self) -> float:
    """Var z."""
    return self.delta**2 * self.p_high * (1 - self.p_high)

  def sample(self, n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
    """n i.i.d. draws."""
    return np.where(rng.random(n) < self.p_high, self.delta, 0.0)


@dataclass(frozen=True)
class LowerBoundMixture:
  """D1 puts mass p on delta, D2 puts mass 1 - p on delta. Both have variance sigma^2."""

  sigma: float
  gap: float
  p: float
  delta: float
  floor: float

  @property
  def first(self) -> TwoPointMixture:
    """Component with the smaller mean."""
    return TwoPointMixture(self.delta, self.p)

  @property
  def second(self) -> TwoPointMixture:
    """Component with the larger mean."""
    return TwoPointMixture(self.delta, 1 - self.p)

  @property
  def means(self) -> tuple[float, float]:
    """Means of both components."""
    return self.first.mean, self.second.mean


def lower_bound_floor(sigma: float, gap: float) -> float:
  """sigma^4 / (4 Delta^2)."""
  return sigma**4 / (4 * gap**2)


def make_lower_bound_mixture(sigma: float, gap: float) -> LowerBoundMixture:
  """Build the mixture for given within-cluster std sigma and mean gap Delta.

  Raises:
    PreconditionError: If Delta <= 0 or Delta^2 < 2 sigma^2.
  """
  if sigma < 0 or gap <= 0:
    raise PreconditionError(f'need sigma >= 0 and Delta > 0, got sigma={sigma}, Delta={gap}')
  if gap**2 < 2 * sigma**2:
    raise PreconditionError(f'need Delta^2 >= 2 sigma^2, got Delta={gap}, sigma={sigma}')
  p = 0.5 - gap / (2 * math.sqrt(4 * sigma**2 + gap**2))
  delta = gap / (1 - 2 * p)
  return LowerBoundMixture(
    sigma=sigma, gap=gap, p=p, delta=delta, floor=lower_bound_floor(sigma, gap)
  )


def sample_mixture(
  mixture: LowerBoundMixture, n_per_component: int, rng: np.random.Generator
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int64]]:
  """Draw n points from each component; returns (points as (2n, 1), component labels)."""
  first = mixture.first.sample(n_per_component, rng)
  second = mixture.second.sample(n_per_component, rng)
  points = np.concatenate([first, second])[:, None]
  labels = np.repeat([0, 1], n_per_component)
  return points, labels
