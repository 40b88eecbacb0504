"""Byzantine message transforms."""

from dataclasses import dataclass
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter

from fedcluster.core.vector import Vector
from fedcluster.errors import ConfigurationError


class NoAttack(BaseModel):
  """Byzantine clients send their honest message."""

  kind: Literal['none'] = 'none'


class LargeGradient(BaseModel):
  """Scale the honest message by s."""

  kind: Literal['large_gradient'] = 'large_gradient'
  scale: float = Field(gt=0)


class SignFlip(BaseModel):
  """Send the negated honest message."""

  kind: Literal['sign_flip'] = 'sign_flip'


class EdgeOfBall(BaseModel):
  """Sit just inside the thresholding ball of the center being estimated.

  Needs the current center and radius, so it can only be applied from inside a clustering loop.
  """

  kind: Literal['edge_of_ball'] = 'edge_of_ball'
  margin: float = Field(0.01, gt=0, lt=1)


AttackKind = Annotated[
  Union[NoAttack, LargeGradient, SignFlip, EdgeOfBall], Field(discriminator='kind')
]

_adapter: TypeAdapter = TypeAdapter(AttackKind)


@dataclass(frozen=True)
class AttackContext:
  """What an omniscient attacker knows about the clustering step it targets.

  direction is a unit vector; when absent it is derived from true_mean, else the first axis.
  """

  center: Vector
  radius: float
  true_mean: Optional[Vector] = None
  direction: Optional[Vector] = None

  def unit_direction(self) -> Vector:
    """Unit vector from the honest center toward the attacked side."""
    if self.direction is not None:
      return np.asarray(self.direction, dtype=np.float64)
    if self.true_mean is not None:
      away = self.center - self.true_mean
      norm = float(np.linalg.norm(away))
      if norm > 0:
        return away / norm
    axis = np.zeros_like(self.center, dtype=np.float64)
    axis[0] = 1.0
    return axis


def apply_attack(kind, honest_message: Vector, context: Optional[AttackContext] = None) -> Vector:
  """The message a Byzantine client sends in place of honest_message.

  Raises:
    ConfigurationError: For EdgeOfBall without a context.
  """
  if isinstance(kind, NoAttack):
    return honest_message
  if isinstance(kind, LargeGradient):
    return kind.scale * honest_message
  if isinstance(kind, SignFlip):
    return -honest_message
  if isinstance(kind, EdgeOfBall):
    if context is None:
      raise ConfigurationError('edge-of-ball attack needs the current center and radius')
    if not np.isfinite(context.radius):
      raise ConfigurationError('edge-of-ball attack needs a finite radius')
    return context.center + (1 - kind.margin) * context.radius * context.unit_direction()
  raise ConfigurationError(f'unknown attack kind {kind!r}')


def parse_attack(spec: str | dict | BaseModel):
  """Build an attack from a mapping or a short string.

  Strings: 'none', 'sign_flip', 'large_gradient:1e4', 'edge_of_ball[:margin]'.
  """
  if isinstance(spec, BaseModel):
    return spec
  if isinstance(spec, dict):
    return _adapter.validate_python(spec)
  kind, _, arg = spec.partition(':')
  try:
    if kind == 'none':
      return NoAttack()
    if kind == 'sign_flip':
      return SignFlip()
    if kind == 'large_gradient':
      return LargeGradient(scale=float(arg or 1e4))
    if kind == 'edge_of_ball':
      return EdgeOfBall(margin=float(arg)) if arg else EdgeOfBall()
  except ValueError as e:
    raise ConfigurationError(f'invalid attack spec {spec!r}: {e}') from e
  raise ConfigurationError(f'unknown attack {spec!r}')
