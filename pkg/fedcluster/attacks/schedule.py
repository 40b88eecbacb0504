"""Which clients are Byzantine, and how they attack."""

import math
from typing import Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, field_validator

from fedcluster.attacks.kinds import AttackKind, NoAttack, parse_attack
from fedcluster.core.rng import stream


class ByzantineSchedule(BaseModel):
  """floor(beta * N) clients attack every message for the whole run."""

  beta: float = Field(0.0, ge=0, le=1)
  kind: AttackKind = Field(default_factory=NoAttack)

  @field_validator('kind', mode='before')
  @classmethod
  def _parse_kind(cls, value):
    return parse_attack(value) if isinstance(value, str) else value

  @property
  def active(self) -> bool:
    """True when at least one client may attack."""
    return self.beta > 0 and not isinstance(self.kind, NoAttack)

  def count(self, n_clients: int) -> int:
    """Number of Byzantine clients, floor(beta * N)."""
    # Guard against 0.29 * 100 = 28.999...
    return math.floor(self.beta * n_clients + 1e-9)


def byzantine_mask(
  schedule: ByzantineSchedule, n_clients: int, seed: int, data_keys: Sequence[int] | None = None
) -> npt.NDArray[np.bool_]:
  """Boolean flag per client, chosen by a seeded permutation of the data keys.

  Flags follow the data keys, so relabeling clients relabels the flags with them.
  """
  mask = np.zeros(n_clients, dtype=bool)
  if not schedule.active:
    return mask
  keys = list(range(n_clients)) if data_keys is None else list(data_keys)
  ranked = sorted(keys)
  order = stream(seed, purpose='byzantine/mask').permutation(n_clients)
  chosen = order[: schedule.count(n_clients)]
  flagged = {ranked[i] for i in chosen}
  for i, key in enumerate(keys):
    mask[i] = key in flagged
  return mask
