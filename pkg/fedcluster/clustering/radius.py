"""Thresholding radius policies."""

import math
from typing import Annotated, Literal, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, TypeAdapter

from fedcluster.core.vector import Vector, squared_distances
from fedcluster.errors import ConfigurationError, EmptyInputError


def percentile_radius(points: npt.NDArray[np.float64], center: Vector, p: float) -> float:
  """Nearest-rank p-th percentile of the distances from points to center."""
  if not 0 < p < 100:
    raise ConfigurationError(f'percentile must lie in (0, 100), got {p}')
  if points.shape[0] == 0:
    raise EmptyInputError('percentile radius needs at least one point')
  distances = np.sort(np.sqrt(squared_distances(points, center)))
  return float(distances[_rank(p, distances.shape[0]) - 1])


def _rank(p: float, n: int) -> int:
  return max(math.ceil(p * n / 100), 1)


def percentile_squared_radii(
  squared: npt.NDArray[np.float64], p: float
) -> npt.NDArray[np.float64]:
  """Row-wise nearest-rank p-th percentile of an (R, N) array of squared distances."""
  if not 0 < p < 100:
    raise ConfigurationError(f'percentile must lie in (0, 100), got {p}')
  if squared.shape[1] == 0:
    raise EmptyInputError('percentile radius needs at least one point')
  k = _rank(p, squared.shape[1]) - 1
  return np.partition(squared, k, axis=1)[:, k]


class FixedRadius(BaseModel):
  """Constant radius; tau = inf disables clipping."""

  kind: Literal['fixed'] = 'fixed'
  tau: float = Field(ge=0)

  def radius(self, points: npt.NDArray[np.float64], center: Vector) -> float:
    """Returns tau."""
    return self.tau

  def squared_radii(self, squared: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """tau^2 for every row of an (R, N) array of squared distances."""
    return np.full(squared.shape[0], self.tau * self.tau)

  def label(self) -> str:
    """Short name used in logs."""
    return f'fixed({self.tau:g})'


class TheoryScaledRadius(BaseModel):
  """tau = scale * sqrt(delta_i * sigma * Delta)."""

  kind: Literal['theory'] = 'theory'
  sigma: float = Field(ge=0)
  delta: float = Field(ge=0)
  delta_i: float = Field(ge=0, le=1)
  scale: float = Field(1.0, gt=0)

  def radius(self, points: npt.NDArray[np.float64], center: Vector) -> float:
    """Same tau every iteration, independent of the points."""
    return self.scale * math.sqrt(self.delta_i * self.sigma * self.delta)

  def squared_radii(self, squared: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """The constant tau^2 for every row."""
    tau2 = self.scale**2 * self.delta_i * self.sigma * self.delta
    return np.full(squared.shape[0], tau2)

  def label(self) -> str:
    """Short name used in logs."""
    return f'theory(c={self.scale:g})'


class PercentileRadius(BaseModel):
  """Radius adapted every iteration to the p-th percentile of distances to the current center."""

  kind: Literal['percentile'] = 'percentile'
  p: float = Field(gt=0, lt=100)

  def radius(self, points: npt.NDArray[np.float64], center: Vector) -> float:
    """Percentile of the current distances."""
    return percentile_radius(points, center, self.p)

  def squared_radii(self, squared: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Per-row percentile of the squared distances (the rank-th point is always inside)."""
    return percentile_squared_radii(squared, self.p)

  def label(self) -> str:
    """Short name used in logs."""
    return f'percentile({self.p:g})'


RadiusPolicy = Annotated[
  Union[FixedRadius, TheoryScaledRadius, PercentileRadius], Field(discriminator='kind')
]

_adapter: TypeAdapter = TypeAdapter(RadiusPolicy)


def parse_radius(spec: str | dict | BaseModel) -> RadiusPolicy:
  """Build a policy from a mapping or a short string.

  Strings: 'fixed:5', 'fixed:inf', 'percentile:20', 'theory:sigma,delta,delta_i[,scale]'.
  """
  if isinstance(spec, BaseModel):
    return spec
  if isinstance(spec, dict):
    return _adapter.validate_python(spec)
  kind, _, args = spec.partition(':')
  try:
    if kind == 'fixed':
      return FixedRadius(tau=float(args))
    if kind == 'percentile':
      return PercentileRadius(p=float(args))
    if kind == 'theory':
      values = [float(a) for a in args.split(',')]
      names = ['sigma', 'delta', 'delta_i', 'scale']
      return TheoryScaledRadius(**dict(zip(names, values)))
  except ValueError as e:
    raise ConfigurationError(f'invalid radius spec {spec!r}: {e}') from e
  raise ConfigurationError(f'unknown radius policy {spec!r}')
