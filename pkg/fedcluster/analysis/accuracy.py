"""Label agreement up to relabeling."""

import itertools
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from fedcluster.errors import DimensionMismatchError

# Enumerate permutations up to this many labels; Hungarian matching beyond.
MAX_ENUMERATED_LABELS = 8


def _confusion(assigned: np.ndarray, truth: np.ndarray) -> np.ndarray:
  _, a = np.unique(assigned, return_inverse=True)
  _, t = np.unique(truth, return_inverse=True)
  size = max(a.max(), t.max()) + 1
  confusion = np.zeros((size, size), dtype=np.int64)
  np.add.at(confusion, (a, t), 1)
  return confusion


def clustering_accuracy(assigned: Sequence[int], true_labels: Sequence[int]) -> float:
  """Best agreement fraction over all one-to-one relabelings of the assigned labels."""
  assigned = np.asarray(assigned)
  truth = np.asarray(true_labels)
  if assigned.shape != truth.shape:
    raise DimensionMismatchError(f'{assigned.shape[0]} assignments for {truth.shape[0]} labels')
  if truth.size == 0:
    return 1.0
  confusion = _confusion(assigned, truth)
  size = confusion.shape[0]
  if size <= MAX_ENUMERATED_LABELS:
    best = max(
      confusion[np.arange(size), list(perm)].sum() for perm in itertools.permutations(range(size))
    )
  else:
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    best = confusion[rows, cols].sum()
  return float(best) / truth.size
