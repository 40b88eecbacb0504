"""Byzantine attack models injected into any algorithm's message stream."""

from fedcluster.attacks.kinds import (
  AttackContext,
  AttackKind,
  EdgeOfBall,
  LargeGradient,
  NoAttack,
  SignFlip,
  apply_attack,
  parse_attack,
)
from fedcluster.attacks.schedule import ByzantineSchedule, byzantine_mask

__all__ = [
  'AttackContext',
  'AttackKind',
  'ByzantineSchedule',
  'EdgeOfBall',
  'LargeGradient',
  'NoAttack',
  'SignFlip',
  'apply_attack',
  'byzantine_mask',
  'parse_attack',
]
