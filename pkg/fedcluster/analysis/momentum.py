"""Stationary variance of the momentum recursion at a fixed point."""

import math

import numpy as np

from fedcluster.core.rng import RngStream
from fedcluster.core.vector import Vector
from fedcluster.errors import ConfigurationError
from fedcluster.problems.oracles import LossOracle


def momentum_variance_probe(
  oracle: LossOracle,
  x: Vector,
  alpha: float,
  draws: int = 10_000,
  seed: int = 0,
  batch_size: int = 1,
) -> float:
  """Empirical E||m - Em||^2 of m <- alpha g + (1 - alpha) m with x held fixed.

  The chain starts at the exact gradient and runs ceil(5 / alpha) burn-in steps before draws
  samples are collected. For i.i.d. noise of variance sigma^2 the limit is
  alpha / (2 - alpha) * sigma^2.
  """
  if not 0 < alpha <= 1:
    raise ConfigurationError(f'alpha must lie in (0, 1], got {alpha}')
  if draws < 2:
    raise ConfigurationError('need at least two draws')
  rng = RngStream(seed, purpose='momentum-probe').generator()
  burn_in = math.ceil(5 / alpha)
  m = oracle.grad(x).copy()
  samples = np.empty((draws, m.shape[0]))
  for step in range(burn_in + draws):
    m = alpha * oracle.stoch_grad(x, batch_size, rng) + (1 - alpha) * m
    if step >= burn_in:
      samples[step - burn_in] = m
  return float(samples.var(axis=0).sum())
