"""Exception hierarchy shared by every fedcluster module."""

from typing import Any, Optional


class FedClusterError(Exception):
  """Base class for all fedcluster errors."""


class DimensionMismatchError(FedClusterError, ValueError):
  """Two vectors (or a vector and an oracle) disagree on dimension."""


class EmptyInputError(FedClusterError, ValueError):
  """An operation that needs at least one point received none."""


class ConfigurationError(FedClusterError):
  """Invalid parameters, unknown names, or an unsupported combination of options."""


class PreconditionError(FedClusterError):
  """A mathematical precondition of a construction does not hold."""


class ConvergenceError(FedClusterError):
  """An inner solver stopped before reaching its tolerance."""


class DivergenceError(FedClusterError):
  """Training produced a non-finite parameter.

  Attributes:
    algorithm: Name of the training loop that diverged.
    round: Round at which the non-finite value appeared.
    client: First client whose parameters became non-finite.
    partial: The RunRecord collected up to (and excluding) the failing round.
  """

  def __init__(
    self, algorithm: str, round: int, client: int, partial: Optional[Any] = None
  ) -> None:
    super().__init__(f'{algorithm} diverged at round {round} (client {client} is non-finite)')
    self.algorithm = algorithm
    self.round = round
    self.client = client
    self.partial = partial
