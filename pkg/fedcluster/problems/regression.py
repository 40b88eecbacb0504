"""Synthetic clustered linear regression.

Client i in cluster k holds a d x n feature matrix with i.i.d. N(k+1, 1) entries (k is 0-based)
and targets y_i = A_i^T x_k*. Every cluster draws its own optimum x_k* from a standard normal.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from fedcluster.core.rng import stream
from fedcluster.errors import ConfigurationError, PreconditionError
from fedcluster.problems.instance import ProblemInstance, TheoryParams
from fedcluster.problems.oracles import RegressionOracle

logger = logging.getLogger(__name__)


def make_synthetic_regression(
  K: int = 4, n_i: int = 75, d: int = 10, n: int = 9, seed: int = 0
) -> ProblemInstance:
  """Build K clusters of n_i regression clients each.

  Args:
    K: Number of clusters.
    n_i: Clients per cluster.
    d: Model dimension.
    n: Samples per client; must be smaller than d so no client can identify x_k* alone.
    seed: Seed for features and optima.

  Returns:
    A ProblemInstance with RegressionOracle clients labelled cluster by cluster.

  Raises:
    PreconditionError: If d <= n.
  """
  if d <= n:
    raise PreconditionError(f'need d > n so local systems are underdetermined, got d={d}, n={n}')
  if K < 1 or n_i < 1 or n < 1:
    raise ConfigurationError(f'K, n_i and n must be positive, got K={K}, n_i={n_i}, n={n}')

  optima = [
    stream(seed, client=k, purpose='regression/optimum').standard_normal(d) for k in range(K)
  ]
  clients: list[RegressionOracle] = []
  labels: list[int] = []
  for k in range(K):
    for j in range(n_i):
      index = k * n_i + j
      features = stream(seed, client=index, purpose='regression/features').normal(
        loc=k + 1, scale=1.0, size=(d, n)
      )
      targets = features.T @ optima[k]
      clients.append(RegressionOracle(features, targets, optimum=optima[k], feature_mean=k + 1))
      labels.append(k)

  params = _theory_params(clients, labels, optima, K)
  logger.debug(
    f'synthetic regression K={K} n_i={n_i} d={d} n={n}: L={params.L:.3g} mu={params.mu:.3g} '
    f'delta={params.delta:.3g}'
  )
  return ProblemInstance(
    name='synthetic_regression',
    clients=clients,
    true_labels=labels,
    params=params,
    initial_params=np.zeros(d),
    true_optima=optima,
  )


def _theory_params(
  clients: list[RegressionOracle], labels: list[int], optima: list[np.ndarray], K: int
) -> TheoryParams:
  # L: largest client curvature; mu: weakest cluster-average curvature.
  L = max(float(np.linalg.eigvalsh(c.hessian)[-1]) for c in clients)
  mu = min(
    float(
      np.linalg.eigvalsh(np.mean([c.hessian for c, lab in zip(clients, labels) if lab == k], 0))[0]
    )
    for k in range(K)
  )
  mu = min(max(mu, 0.0), L)
  if K > 1:
    delta = min(
      float(np.linalg.norm(optima[a] - optima[b])) for a in range(K) for b in range(a + 1, K)
    )
  else:
    delta = 0.0
  return TheoryParams(delta=delta, delta_i=1 / K, L=L, mu=mu)


def dump_problem_csv(problem: ProblemInstance, path: str | Path) -> Path:
  """Write one row per sample: client_id, cluster_id, x0..x{d-1}, target."""
  frames = []
  for client, (oracle, label) in enumerate(zip(problem.clients, problem.true_labels)):
    if not isinstance(oracle, RegressionOracle):
      raise ConfigurationError(f'client {client} is not data-backed; nothing to dump')
    frame = pd.DataFrame(oracle.features.T, columns=[f'x{j}' for j in range(oracle.dim)])
    frame.insert(0, 'cluster_id', label)
    frame.insert(0, 'client_id', problem.data_keys[client])
    frame['target'] = oracle.targets
    frames.append(frame)
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  pd.concat(frames, ignore_index=True).to_csv(path, index=False, float_format='%.17g')
  return path
