import numpy as np
import pytest

from fedcluster.attacks.kinds import (
  AttackContext,
  EdgeOfBall,
  LargeGradient,
  NoAttack,
  SignFlip,
  apply_attack,
  parse_attack,
)
from fedcluster.attacks.schedule import ByzantineSchedule, byzantine_mask
from fedcluster.clustering.threshold import clip_point
from fedcluster.core.rng import stream
from fedcluster.errors import ConfigurationError


def test_sign_flip():
  assert apply_attack(SignFlip(), np.array([2.0, -1.0])).tolist() == [-2.0, 1.0]


def test_large_gradient():
  assert apply_attack(LargeGradient(scale=100), np.array([1.0, 0.0])).tolist() == [100.0, 0.0]


def test_no_attack_is_identity():
  g = np.array([0.1, 0.2])
  assert apply_attack(NoAttack(), g) is g


def test_edge_of_ball_example_survives_clipping():
  v = np.zeros(2)
  context = AttackContext(center=v, radius=3.0, direction=np.array([1.0, 0.0]))
  placed = apply_attack(EdgeOfBall(margin=0.01), np.array([50.0, 50.0]), context)
  np.testing.assert_allclose(placed, [2.97, 0.0])
  assert np.array_equal(clip_point(placed, v, 3.0), placed)


@pytest.mark.parametrize('seed', range(25))
def test_edge_of_ball_distance_band(seed):
  rng = stream(seed, purpose='test/edge-band')
  v = rng.normal(size=3)
  tau = float(rng.uniform(0.1, 10))
  margin = float(rng.uniform(0.001, 0.5))
  context = AttackContext(center=v, radius=tau, true_mean=rng.normal(size=3))
  distance = np.linalg.norm(apply_attack(EdgeOfBall(margin=margin), v, context) - v)
  assert (1 - 2 * margin) * tau <= distance <= tau


def test_edge_of_ball_default_direction_is_away_from_mean():
  context = AttackContext(center=np.array([1.0, 0.0]), radius=1.0, true_mean=np.zeros(2))
  np.testing.assert_allclose(context.unit_direction(), [1.0, 0.0])
  axis_only = AttackContext(center=np.zeros(2), radius=1.0, true_mean=np.zeros(2))
  np.testing.assert_allclose(axis_only.unit_direction(), [1.0, 0.0])


def test_edge_of_ball_needs_context():
  with pytest.raises(ConfigurationError):
    apply_attack(EdgeOfBall(), np.zeros(2))


def test_parse_attack():
  assert parse_attack('sign_flip') == SignFlip()
  assert parse_attack('large_gradient:1e4') == LargeGradient(scale=1e4)
  assert parse_attack('edge_of_ball:0.05') == EdgeOfBall(margin=0.05)
  assert parse_attack({'kind': 'none'}) == NoAttack()
  with pytest.raises(ConfigurationError):
    parse_attack('label_flip')


def test_attack_kind_validation():
  with pytest.raises(ValueError):
    LargeGradient(scale=0)
  with pytest.raises(ValueError):
    EdgeOfBall(margin=1.0)


def test_byzantine_mask_counts_and_reproducibility():
  schedule = ByzantineSchedule(beta=0.29, kind='sign_flip')
  mask = byzantine_mask(schedule, 100, seed=3)
  assert mask.sum() == 29
  assert np.array_equal(mask, byzantine_mask(schedule, 100, seed=3))
  assert not np.array_equal(mask, byzantine_mask(schedule, 100, seed=4))


def test_byzantine_mask_follows_data_keys():
  schedule = ByzantineSchedule(beta=0.25, kind='sign_flip')
  base = byzantine_mask(schedule, 8, seed=1)
  order = [3, 1, 7, 0, 2, 6, 5, 4]
  permuted = byzantine_mask(schedule, 8, seed=1, data_keys=order)
  assert permuted.tolist() == [base[i] for i in order]


def test_inactive_schedule_flags_nobody():
  assert not byzantine_mask(ByzantineSchedule(beta=0.5), 10, seed=0).any()
  assert not byzantine_mask(ByzantineSchedule(beta=0.0, kind='sign_flip'), 10, seed=0).any()
