"""Deterministic, splittable random streams keyed by (seed, client, round, purpose)."""

import hashlib
from dataclasses import dataclass

import numpy as np


def purpose_key(purpose: str) -> int:
  """Stable 64-bit integer for a purpose tag (independent of PYTHONHASHSEED)."""
  digest = hashlib.blake2b(purpose.encode('utf-8'), digest_size=8).digest()
  return int.from_bytes(digest, 'little')


@dataclass(frozen=True)
class RngStream:
  """One independent random stream.

  Two streams with equal fields produce identical draws; any differing field gives a statistically
  independent stream (numpy SeedSequence spawn keys over a Philox counter-based generator).
  """

  seed: int
  client: int = 0
  round: int = 0
  purpose: str = 'default'

  def __post_init__(self):
    if self.seed < 0 or self.seed >= 2**64:
      raise ValueError(f'seed must be a 64-bit unsigned integer, got {self.seed}')
    if self.client < 0 or self.round < 0:
      raise ValueError('client and round must be nonnegative')

  def generator(self) -> np.random.Generator:
    """Fresh generator positioned at the start of this stream."""
    sequence = np.random.SeedSequence(
      self.seed, spawn_key=(self.client, self.round, purpose_key(self.purpose))
    )
    return np.random.Generator(np.random.Philox(sequence))

  def child(self, purpose: str) -> 'RngStream':
    """Same (seed, client, round) with a sub-purpose appended."""
    return RngStream(self.seed, self.client, self.round, f'{self.purpose}/{purpose}')


def stream(
  seed: int, client: int = 0, round: int = 0, purpose: str = 'default'
) -> np.random.Generator:
  """Shorthand for ``RngStream(...).generator()``."""
  return RngStream(seed, client, round, purpose).generator()
