"""The three small counter-examples on which Myopic-Clustering, IFCA and Clustered-FL fail."""

import numpy as np

from fedcluster.core.vector import Vector
from fedcluster.errors import ConfigurationError
from fedcluster.problems.instance import ProblemInstance, TheoryParams
from fedcluster.problems.oracles import AnalyticOracle, TwoPointGradientOracle


def _piecewise_value(x: float, eta: float) -> float:
  if x < 1:
    return 4 * (x - 1) ** 3 + 3 * (x - 1) ** 4 + 1
  return (x - 1) ** 2 / (2 * eta) + 1


def _piecewise_grad(x: float, eta: float) -> float:
  if x < 1:
    # d/dx [4(x-1)^3 + 3(x-1)^4] = 12 x (x-1)^2
    return 12 * x * (x - 1) ** 2
  return (x - 1) / eta


def make_example1(eta: float) -> ProblemInstance:
  """Three scalar clients; {1, 2} share stationary points, {3} is alone.

  Client 2's loss has a flat saddle at x=1 where Myopic-Clustering gets stuck when started at
  x_0 = 1.5.
  """
  if eta <= 0:
    raise ConfigurationError(f'eta must be positive, got {eta}')

  def f1(x: Vector) -> float:
    return float(x[0] ** 2 / (6 * eta))

  def g1(x: Vector) -> Vector:
    return x / (3 * eta)

  def f2(x: Vector) -> float:
    return _piecewise_value(float(x[0]), eta)

  def g2(x: Vector) -> Vector:
    return np.array([_piecewise_grad(float(x[0]), eta)])

  def f3(x: Vector) -> float:
    return float((x[0] - 2) ** 2 / (2 * eta))

  def g3(x: Vector) -> Vector:
    return (x - 2) / eta

  return ProblemInstance(
    name='example1',
    clients=[
      AnalyticOracle(g1, f1, name='f1'),
      AnalyticOracle(g2, f2, name='f2'),
      AnalyticOracle(g3, f3, name='f3'),
    ],
    true_labels=[0, 0, 1],
    params=TheoryParams(delta_i=2 / 3),
    initial_params=np.array([1.5]),
  )


def make_example2() -> ProblemInstance:
  """Two scalar quadratics with optima -0.5 and 0.5; IFCA starts from cluster models -1.5 and 0."""
  optima = [np.array([-0.5]), np.array([0.5])]
  clients = [
    AnalyticOracle(lambda x, c=c: 2 * (x - c), lambda x, c=c: float((x[0] - c[0]) ** 2))
    for c in optima
  ]
  return ProblemInstance(
    name='example2',
    clients=clients,
    true_labels=[0, 1],
    params=TheoryParams(delta=2.0, delta_i=0.5, L=2.0, mu=2.0),
    initial_params=np.array([0.0]),
    cluster_inits=[np.array([-1.5]), np.array([0.0])],
    true_optima=optima,
  )


def make_example3() -> ProblemInstance:
  """Gradient-only clients g1 = x, g2 = x - 1/2 and a two-point stochastic g3 in {x, x - 1}.

  g3 has expectation x - 1/2, so clients 2 and 3 form one cluster. The point 1/4 is recorded as
  the reference split point.
  """
  clients = [
    AnalyticOracle(lambda x: x.copy(), name='g1'),
    AnalyticOracle(lambda x: x - 0.5, name='g2'),
    TwoPointGradientOracle((0.0, 1.0)),
  ]
  return ProblemInstance(
    name='example3',
    clients=clients,
    true_labels=[0, 1, 1],
    params=TheoryParams(sigma=0.5, delta=0.5, delta_i=2 / 3, L=1.0, mu=1.0),
    initial_params=np.array([0.0]),
    true_optima=[np.array([0.0]), np.array([0.5])],
    reference_point=np.array([0.25]),
  )
