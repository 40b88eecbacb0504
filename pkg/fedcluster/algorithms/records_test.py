import numpy as np
import pytest

from fedcluster.algorithms import ALGORITHMS, get_algorithm
from fedcluster.algorithms.config import TrainerConfig
from fedcluster.algorithms.records import CSV_COLUMNS, RunRecord
from fedcluster.clustering.radius import PercentileRadius
from fedcluster.errors import ConfigurationError
from fedcluster.problems.examples import make_example2


def _record():
  record = RunRecord(algorithm='fc', problem='toy', seed=7, honest=np.array([True, False]))
  record.append(0, {'grad_norm_sq': np.array([1.0, 2.0]), 'cluster': np.array([0, 1])}, 0)
  record.append(1, {'grad_norm_sq': np.array([0.5, 0.25]), 'cluster': np.array([0, 0])}, 4)
  return record


def test_to_frame_layout():
  frame = _record().to_frame('demo')
  assert list(frame.columns) == CSV_COLUMNS
  assert len(frame) == 2 * (1 + 2 * 2)
  first = frame.iloc[0]
  assert (first['round'], first['client'], first['metric']) == (0, -1, 'messages')
  round1 = frame[frame['round'] == 1]
  assert round1['metric'].tolist() == [
    'messages',
    'grad_norm_sq',
    'cluster',
    'grad_norm_sq',
    'cluster',
  ]
  assert round1['value'].tolist() == [4.0, 0.5, 0.0, 0.25, 0.0]
  assert set(frame['experiment']) == {'demo'}
  assert set(frame['algo']) == {'fc'}


def test_summaries():
  record = _record()
  assert record.final_mean('grad_norm_sq') == 0.5
  assert record.final_mean('grad_norm_sq', honest_only=False) == 0.375
  assert record.time_average().tolist() == [1.0, 2.0]
  assert record.total_messages == 4
  with pytest.raises(KeyError):
    record.series('loss')


def test_rounds_must_increase():
  record = _record()
  with pytest.raises(ValueError):
    record.append(1, {'grad_norm_sq': np.zeros(2)}, 0)


def test_registry():
  assert set(ALGORITHMS) == {
    'fc',
    'momentum',
    'myopic',
    'ifca_i',
    'ifca_ii',
    'hypcluster',
    'cfl',
    'local',
    'global',
    'gt',
  }
  with pytest.raises(ConfigurationError):
    get_algorithm('kmeans')


@pytest.mark.parametrize('name', ['fc', 'momentum', 'myopic', 'ifca_i', 'ifca_ii', 'local'])
def test_every_loop_reports_the_same_shape(name):
  cfg = TrainerConfig(eta=0.1, rounds=4, radius=PercentileRadius(p=20))
  record = get_algorithm(name)(make_example2(), cfg)
  assert record.algorithm == name
  assert record.rounds == [0, 1, 2, 3, 4]
  assert record.final_params.shape == (2, 1)
  assert record.series('loss').shape == (5, 2)
