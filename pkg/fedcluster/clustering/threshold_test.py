import numpy as np
import pytest

from fedcluster.attacks.kinds import EdgeOfBall, SignFlip
from fedcluster.clustering.radius import FixedRadius, PercentileRadius, TheoryScaledRadius
from fedcluster.clustering.threshold import (
  clip_point,
  farthest_first_inits,
  run_threshold_clustering,
  threshold_clustering_batch,
  threshold_update,
)
from fedcluster.core.rng import stream
from fedcluster.errors import ConfigurationError, DimensionMismatchError, EmptyInputError

INF = float('inf')


def test_clip_point_examples():
  v = np.zeros(2)
  z = np.array([1.0, 2.0])
  assert np.array_equal(clip_point(z, z, 0.5), z)
  assert np.array_equal(clip_point(np.array([3.0, 0.0]), v, 3.0), [3.0, 0.0])
  assert np.array_equal(clip_point(np.array([5.0, 0.0]), v, 3.0), [0.0, 0.0])


def test_threshold_update_examples():
  points = [[0.0], [1.0], [10.0]]
  assert threshold_update(points, [0.0], 2.0)[0] == pytest.approx(1 / 3)
  np.testing.assert_allclose(threshold_update(points, [0.0], 100.0), [11 / 3])
  assert threshold_update(points, [100.0], 1.0).tolist() == [100.0]


def test_threshold_update_empty():
  with pytest.raises(EmptyInputError):
    threshold_update([], np.zeros(2), 1.0)


def test_threshold_update_rejects_negative_radius():
  with pytest.raises(ConfigurationError):
    threshold_update([[0.0]], [0.0], -1.0)


@pytest.mark.parametrize('seed', range(20))
def test_step_bounded_and_in_convex_hull(seed):
  rng = stream(seed, purpose='test/step')
  points = rng.normal(size=(15, 3)) * 4
  v = rng.normal(size=3)
  tau = float(rng.uniform(0.5, 6.0))
  updated = threshold_update(points, v, tau)
  assert np.linalg.norm(updated - v) <= tau * (1 + 1e-12)
  # Convex hull of {v} and inside points: the update is v + sum(w_i (z_i - v)), w_i = 1/N.
  inside = np.linalg.norm(points - v, axis=1) <= tau
  weights = np.full(inside.sum(), 1 / 15)
  np.testing.assert_allclose(updated, v + weights @ (points[inside] - v), atol=1e-12)


def test_fixpoint_is_idempotent():
  points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [40.0, 40.0]])
  v = points[:3].mean(axis=0)
  once = threshold_update(points, v, 5.0)
  np.testing.assert_allclose(threshold_update(points, once, 5.0), once, atol=1e-12)


def test_update_is_permutation_invariant():
  rng = stream(3, purpose='test/perm')
  points = rng.normal(size=(40, 4)) * 10.0 ** rng.integers(-5, 5, size=(40, 1))
  v = rng.normal(size=4)
  reference = threshold_update(points, v, 2.0)
  for r in range(5):
    shuffled = points[stream(r, purpose='test/perm-order').permutation(40)]
    assert np.array_equal(threshold_update(shuffled, v, 2.0), reference)


def test_single_round_without_clipping_is_sample_mean():
  points = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 9.0]])
  state = run_threshold_clustering(
    points, 1, inits=[[0.0, 0.0]], rounds=1, policy=FixedRadius(tau=INF)
  )
  np.testing.assert_allclose(state.centers[0], points.mean(axis=0))
  assert len(state.trajectory) == 2
  assert state.inside[0].tolist() == [0, 1, 2]


def test_two_separated_clusters():
  rng = stream(0, purpose='test/two')
  points = np.concatenate([rng.normal(size=(30, 2)), rng.normal(size=(30, 2)) + [20.0, 0.0]])
  state = run_threshold_clustering(points, 2, rounds=40, policy=FixedRadius(tau=5.0))
  found = sorted(state.centers.tolist())
  np.testing.assert_allclose(found[0], points[:30].mean(axis=0), atol=1e-9)
  np.testing.assert_allclose(found[1], points[30:].mean(axis=0), atol=1e-9)


def test_theory_radius_value():
  policy = TheoryScaledRadius(sigma=2.0, delta=8.0, delta_i=0.25, scale=1.5)
  assert policy.radius(np.zeros((1, 1)), np.zeros(1)) == pytest.approx(1.5 * 2.0)


def test_farthest_first_depends_only_on_values():
  points = np.array([[1.0], [1.0], [-1.0]])
  np.testing.assert_array_equal(farthest_first_inits(points, 2), [[-1.0], [1.0]])
  np.testing.assert_array_equal(farthest_first_inits(points[::-1], 2), [[-1.0], [1.0]])
  with pytest.raises(ConfigurationError):
    farthest_first_inits(points, 4)


def test_edge_of_ball_attackers_stay_inside_and_shift_center():
  rng = stream(1, purpose='test/edge')
  points = rng.normal(size=(50, 2))
  mask = np.zeros(50, dtype=bool)
  mask[:5] = True
  clean = run_threshold_clustering(
    points[~mask], 1, inits=[[0.0, 0.0]], rounds=10, policy=FixedRadius(tau=3.0)
  )
  attacked = run_threshold_clustering(
    points,
    1,
    inits=[[0.0, 0.0]],
    rounds=10,
    policy=FixedRadius(tau=3.0),
    byzantine=mask,
    attack=EdgeOfBall(margin=0.01),
    true_means=np.zeros((1, 2)),
  )
  # All five attackers count as inside the final ball.
  assert set(range(5)) <= set(attacked.inside[0].tolist())
  assert np.linalg.norm(attacked.centers[0]) > np.linalg.norm(clean.centers[0])


def test_static_attack_transforms_masked_points():
  points = np.array([[1.0], [1.0], [1.0]])
  mask = np.array([False, False, True])
  state = run_threshold_clustering(
    points,
    1,
    inits=[[1.0]],
    rounds=1,
    policy=FixedRadius(tau=INF),
    byzantine=mask,
    attack=SignFlip(),
  )
  assert state.centers[0, 0] == pytest.approx(1 / 3)


def test_no_attackers_is_bit_identical():
  rng = stream(2, purpose='test/noop')
  points = rng.normal(size=(30, 3))
  plain = run_threshold_clustering(points, 2, rounds=5, policy=PercentileRadius(p=20))
  masked = run_threshold_clustering(
    points,
    2,
    rounds=5,
    policy=PercentileRadius(p=20),
    byzantine=np.zeros(30, dtype=bool),
    attack=EdgeOfBall(),
  )
  assert np.array_equal(plain.centers, masked.centers)


def test_batch_matches_one_problem_at_a_time():
  rng = stream(6, purpose='test/batch')
  points = rng.normal(size=(3, 25, 2)) * 3
  inits = rng.normal(size=(3, 2))
  policy = FixedRadius(tau=2.5)
  batch = threshold_clustering_batch(points, inits, 6, policy)
  assert len(batch.trajectory) == 7
  for r in range(3):
    v = inits[r]
    for _ in range(6):
      v = threshold_update(points[r], v, 2.5)
    np.testing.assert_allclose(batch.centers[r], v, rtol=1e-12, atol=1e-12)
    inside = np.linalg.norm(points[r] - batch.trajectory[-2][r], axis=1) <= 2.5
    assert np.array_equal(batch.inside[r], inside)
  np.testing.assert_array_equal(batch.radii, [2.5, 2.5, 2.5])


def test_batch_percentile_ball_holds_its_rank():
  rng = stream(7, purpose='test/batch-rank')
  points = rng.normal(size=(4, 30, 3))
  batch = threshold_clustering_batch(points, points[:, 0, :], 5, PercentileRadius(p=20))
  # Nearest rank ceil(0.2 * 30) = 6.
  assert np.all(batch.inside.sum(axis=1) >= 6)
  distances = np.linalg.norm(points - batch.trajectory[-2][:, None, :], axis=2)
  np.testing.assert_allclose(batch.radii, np.sort(distances, axis=1)[:, 5])


def test_batch_without_clipping_is_sample_mean():
  points = np.array([[[1.0], [2.0], [6.0]], [[0.0], [0.0], [3.0]]])
  batch = threshold_clustering_batch(points, np.zeros((2, 1)), 1, FixedRadius(tau=INF))
  np.testing.assert_allclose(batch.centers, [[3.0], [1.0]])
  assert batch.inside.all()


def test_batch_rejects_bad_inputs():
  with pytest.raises(ConfigurationError):
    threshold_clustering_batch(np.zeros((1, 2, 1)), np.zeros((1, 1)), 0, FixedRadius(tau=1.0))
  with pytest.raises(DimensionMismatchError):
    threshold_clustering_batch(np.zeros((2, 2, 1)), np.zeros((1, 1)), 1, FixedRadius(tau=1.0))


def test_clustering_ignores_point_order():
  rng = stream(8, purpose='test/order')
  points = np.concatenate([rng.normal(size=(20, 2)), rng.normal(size=(20, 2)) + [8.0, 0.0]])
  policy = PercentileRadius(p=25)
  reference = run_threshold_clustering(points, 2, rounds=8, policy=policy)
  for r in range(3):
    order = stream(r, purpose='test/order-perm').permutation(40)
    state = run_threshold_clustering(points[order], 2, rounds=8, policy=policy)
    assert np.array_equal(state.centers, reference.centers)
    for mine, theirs in zip(state.inside, reference.inside):
      assert np.array_equal(np.sort(order[mine]), theirs)
