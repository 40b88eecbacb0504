"""Per-seed computations behind the catalog experiments.

Every study takes the resolved ExperimentConfig and one root seed and returns a SeedOutcome. All
randomness is drawn from streams keyed by that seed, so a study's output does not depend on which
worker runs it or in what order.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd

from fedcluster.algorithms import RunRecord, get_algorithm
from fedcluster.algorithms.records import CSV_COLUMNS
from fedcluster.analysis.assumptions import trace_assumptions
from fedcluster.analysis.center import center_error, oracle_center_error
from fedcluster.analysis.momentum import momentum_variance_probe
from fedcluster.attacks.kinds import EdgeOfBall, parse_attack
from fedcluster.attacks.schedule import ByzantineSchedule, byzantine_mask
from fedcluster.clustering.radius import PercentileRadius, TheoryScaledRadius
from fedcluster.clustering.threshold import run_threshold_clustering
from fedcluster.core.rng import stream
from fedcluster.errors import ConfigurationError, DivergenceError
from fedcluster.experiments.config import ExperimentConfig
from fedcluster.problems.blobs import blob_centers, make_blobs
from fedcluster.problems.examples import make_example1, make_example2, make_example3
from fedcluster.problems.instance import ProblemInstance
from fedcluster.problems.lower_bound import make_lower_bound_mixture, sample_mixture
from fedcluster.problems.oracles import GaussianNoiseOracle, QuadraticOracle
from fedcluster.problems.regression import make_synthetic_regression

logger = logging.getLogger(__name__)


@dataclass
class SeedOutcome:
  """Everything one seed of an experiment produced.

  Attributes:
    seed: Root seed.
    records: Training runs by output label.
    rows: (round, client, metric, value) rows of the non-training studies by output label.
    values: Scalars and small lists read by the experiment's summary, keyed '<label>.<name>'.
    diverged: Labels whose run stopped on a non-finite parameter.
  """

  seed: int
  records: dict[str, RunRecord] = field(default_factory=dict)
  rows: dict[str, list[tuple[int, int, str, float]]] = field(default_factory=dict)
  values: dict[str, Any] = field(default_factory=dict)
  diverged: list[str] = field(default_factory=list)

  @property
  def labels(self) -> list[str]:
    """Training labels followed by study labels."""
    return [*self.records, *self.rows]

  def add(self, label: str, round: int, client: int, metric: str, value: float) -> None:
    """Append one CSV row under label."""
    self.rows.setdefault(label, []).append((round, client, metric, float(value)))

  def frame(self, label: str, experiment: str) -> pd.DataFrame:
    """Long CSV table of one label."""
    if label in self.records:
      frame = self.records[label].to_frame(experiment)
      frame['algo'] = label
      return frame
    frame = pd.DataFrame(self.rows[label], columns=['round', 'client', 'metric', 'value'])
    frame.insert(0, 'seed', self.seed)
    frame.insert(0, 'algo', label)
    frame.insert(0, 'experiment', experiment)
    return frame[CSV_COLUMNS]


def train(
  outcome: SeedOutcome,
  cfg: ExperimentConfig,
  algorithm: str,
  problem: ProblemInstance,
  label: str | None = None,
  **updates: Any,
) -> RunRecord:
  """Run one training loop and file its record.

  A run that halts on divergence keeps its partial record; one that records its divergence and
  stops is kept as is. Either way the label is listed as diverged.
  """
  label = label or algorithm
  trainer = cfg.trainer_for(algorithm, outcome.seed, **updates)
  try:
    record = get_algorithm(algorithm)(problem, trainer)
  except DivergenceError as e:
    logger.warning(f'{label} seed {outcome.seed}: {e}; keeping rounds up to {e.round - 1}')
    record = e.partial
    outcome.diverged.append(label)
  else:
    if record.diverged:
      outcome.diverged.append(label)
  outcome.records[label] = record
  return record


def _step_size(cfg: ExperimentConfig, problem: ProblemInstance) -> dict[str, float]:
  # An explicit eta wins; otherwise eta_scale / L of the drawn problem.
  if 'eta' in cfg.trainer:
    return {}
  return {'eta': cfg.setting('eta_scale', 0.5) / problem.params.L}


def _regression(cfg: ExperimentConfig, seed: int, n_i: int | None = None) -> ProblemInstance:
  return make_synthetic_regression(
    K=cfg.setting('K', 4),
    n_i=n_i if n_i is not None else cfg.setting('n_i', 4),
    d=cfg.setting('d', 10),
    n=cfg.setting('n', 9),
    seed=seed,
  )


def simplex_centers(K: int, d: int, delta: float) -> npt.NDArray[np.float64]:
  """K centers at pairwise distance delta: scaled standard basis vectors."""
  if K > d:
    raise ConfigurationError(f'cannot place {K} equidistant centers in {d} dimensions')
  return np.eye(K, d) * (delta / math.sqrt(2)) if K > 1 else np.zeros((1, d))


def _theory_radius(K: int, d: int, sigma: float, delta: float) -> TheoryScaledRadius:
  return TheoryScaledRadius(sigma=sigma * math.sqrt(d), delta=delta, delta_i=1 / K)


def example1(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """The piecewise counter-example is built with each algorithm's own step size."""
  outcome = SeedOutcome(seed)
  for algorithm in cfg.algorithms:
    eta = cfg.trainer_for(algorithm, seed).eta
    record = train(outcome, cfg, algorithm, make_example1(eta))
    for i, x in enumerate(record.final_params[:, 0], 1):
      outcome.values[f'{algorithm}.final_x{i}'] = float(x)
    outcome.values[f'{algorithm}.partition'] = record.partition
  return outcome


def example2(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """IFCA from its bad cluster models, and Federated-Clustering, on the two quadratics."""
  outcome = SeedOutcome(seed)
  problem = make_example2()
  for algorithm in cfg.algorithms:
    record = train(outcome, cfg, algorithm, problem)
    for i, x in enumerate(record.final_params[:, 0], 1):
      outcome.values[f'{algorithm}.final_x{i}'] = float(x)
    if record.trajectory:
      path = np.stack(record.trajectory)[:, 1, 0]
      outcome.values[f'{algorithm}.max_abs_x2'] = float(np.abs(path).max())
    outcome.values[f'{algorithm}.all_in_cluster2'] = bool(np.all(record.series('cluster') == 1))
  return outcome


def example3(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """One Clustered-FL split of the three-client problem."""
  outcome = SeedOutcome(seed)
  for algorithm in cfg.algorithms:
    record = train(outcome, cfg, algorithm, make_example3())
    outcome.values[f'{algorithm}.partition'] = record.partition
    if 'split_point' in record.extras:
      outcome.values[f'{algorithm}.split_point'] = float(record.extras['split_point'][0])
  return outcome


def blobs(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """Center error against n_i at fixed separation, and error-vs-iteration curves per sigma."""
  outcome = SeedOutcome(seed)
  K, d = cfg.setting('K', 2), cfg.setting('d', 10)
  sigma, delta = cfg.setting('sigma', 1.0), cfg.setting('delta', 20.0)
  iterations = cfg.trainer.get('clustering_rounds', 10)
  centers = simplex_centers(K, d, delta)
  policy = _theory_radius(K, d, sigma, delta)
  for n_i in cfg.setting('n_i', [15, 30, 60]):
    blob = make_blobs(K, n_i, sigma, centers=centers, seed=seed)
    state = run_threshold_clustering(blob.points, K, rounds=iterations, policy=policy)
    errors = center_error(state, centers)
    oracle = oracle_center_error(blob.points, blob.labels, centers)
    for k in range(K):
      outcome.add('threshold', iterations, k, f'center_error_ni{n_i}', errors[k])
      outcome.add('threshold', iterations, k, f'oracle_error_ni{n_i}', oracle[k])
    outcome.values[f'threshold.center_error_ni{n_i}'] = float(errors.mean())
    outcome.values[f'threshold.oracle_error_ni{n_i}'] = float(oracle.mean())

  # Shared centers across sigmas and repeats; only the points vary with the seed.
  n_elbow = cfg.setting('elbow_K', 10)
  elbow_centers = blob_centers(n_elbow, d, cfg.setting('center_seed', 0))
  elbow_policy = PercentileRadius(p=cfg.setting('elbow_percentile', 10))
  length = cfg.trainer.get('rounds', 25)
  for s in cfg.setting('sigmas', [0.5, 1.0, 2.0, 4.0]):
    blob = make_blobs(n_elbow, cfg.setting('elbow_per_cluster', 9), s, elbow_centers, seed=seed)
    state = run_threshold_clustering(blob.points, n_elbow, rounds=length, policy=elbow_policy)
    curve = [float(np.sqrt(center_error(c, elbow_centers)).mean()) for c in state.trajectory]
    for iteration, distance in enumerate(curve):
      outcome.add('threshold', iteration, -1, f'distance_sigma{s:g}', distance)
    outcome.values[f'threshold.curve_sigma{s:g}'] = curve
  return outcome


def lower_bound(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """Threshold-Clustering error on one draw of the two-point mixture."""
  outcome = SeedOutcome(seed)
  sigma = cfg.setting('sigma', 1.0)
  mixture = make_lower_bound_mixture(sigma, cfg.setting('gap', 2 * sigma))
  points, _ = sample_mixture(
    mixture, cfg.setting('n_per_component', 50), stream(seed, purpose='lower_bound/mixture')
  )
  iterations = cfg.trainer.get('clustering_rounds', 10)
  state = run_threshold_clustering(
    points, 2, rounds=iterations, policy=PercentileRadius(p=cfg.setting('percentile', 20))
  )
  errors = center_error(state, [[m] for m in mixture.means])
  for k in range(2):
    outcome.add('threshold', iterations, k, 'center_error', errors[k])
  outcome.values['threshold.error_mu1'] = float(errors[0])
  outcome.values['threshold.floor'] = mixture.floor
  return outcome


def synthetic_regression(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """Every training loop on a fresh regression problem per n_i."""
  outcome = SeedOutcome(seed)
  for n_i in cfg.setting('n_i', [4, 16]):
    problem = _regression(cfg, seed, n_i)
    for algorithm in cfg.algorithms:
      label = f'{algorithm}_ni{n_i}'
      record = train(outcome, cfg, algorithm, problem, label, **_step_size(cfg, problem))
      outcome.values[f'{label}.test_loss'] = record.final_mean('test_loss')
  return outcome


def assumption_trace(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """Assumption estimators along the ground-truth trajectory, plus the momentum variance probe."""
  outcome = SeedOutcome(seed)
  problem = _regression(cfg, seed)
  record = train(outcome, cfg, 'gt', problem, keep_trajectory=True, **_step_size(cfg, problem))
  first = [problem.members(k)[0] for k in range(problem.n_clusters)]
  trace = trace_assumptions(problem, [params[first] for params in record.trajectory], record.rounds)
  for row, t in enumerate(trace.rounds):
    for i, ratio in enumerate(trace.intra[row]):
      outcome.add('assumptions', t, i, 'intra_ratio', ratio)
    outcome.add('assumptions', t, -1, 'inter_sep', trace.inter[row])

  rounds = np.asarray(trace.rounds)
  window = trace.mean_intra[rounds >= cfg.setting('start', 50)]
  with np.errstate(invalid='ignore', divide='ignore'):
    excess = float(np.nanmax(window) / trace.mean_intra[-1] - 1) if window.size else math.nan
  outcome.values['gt.intra_excess'] = excess
  outcome.values['gt.min_inter_sep'] = float(trace.inter.min())

  dim = cfg.setting('probe_dim', 2)
  noise = cfg.setting('probe_sigma', 1.0)
  oracle = GaussianNoiseOracle(QuadraticOracle(np.zeros(dim)), sigma=noise)
  for alpha in cfg.setting('alphas', [0.05, 0.1, 0.5]):
    variance = momentum_variance_probe(
      oracle, np.ones(dim), alpha, draws=cfg.setting('probe_draws', 10_000), seed=seed
    )
    outcome.add('momentum_probe', 0, -1, f'variance_alpha{alpha:g}', variance)
    outcome.values[f'momentum_probe.variance_alpha{alpha:g}'] = variance
  return outcome


def byzantine(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
  """Message attacks on regression training, and edge-of-ball attackers on blob clustering."""
  outcome = SeedOutcome(seed)
  problem = _regression(cfg, seed)
  step = _step_size(cfg, problem)
  beta = cfg.setting('beta', 0.25)
  schedules = {'clean': ByzantineSchedule()}
  for spec in cfg.setting('attacks', ['sign_flip', 'large_gradient:1e4']):
    schedules[parse_attack(spec).kind] = ByzantineSchedule(beta=beta, kind=spec)
  for tag, schedule in schedules.items():
    for algorithm in cfg.algorithms:
      label = f'{algorithm}_{tag}'
      record = train(outcome, cfg, algorithm, problem, label, byzantine=schedule, **step)
      outcome.values[f'{label}.test_loss'] = record.final_mean('test_loss')

  _edge_of_ball(cfg, outcome)
  return outcome


def _edge_of_ball(cfg: ExperimentConfig, outcome: SeedOutcome) -> None:
  # Each seed averages `edge_repeats` independent blob draws, keyed by (seed, repeat).
  K, d = cfg.setting('blob_K', 2), cfg.setting('d', 10)
  sigma, delta = cfg.setting('sigma', 1.0), cfg.setting('delta', 20.0)
  repeats = cfg.setting('edge_repeats', 20)
  centers = simplex_centers(K, d, delta)
  policy = _theory_radius(K, d, sigma, delta)
  iterations = cfg.trainer.get('clustering_rounds', 10)
  betas = cfg.setting('betas', [0.0, 0.05, 0.1, 0.2])
  errors = np.zeros((len(betas), K))
  matches = True
  for r in range(repeats):
    key = outcome.seed * repeats + r
    blob = make_blobs(K, cfg.setting('per_cluster', 60), sigma, centers=centers, seed=key)
    clean = run_threshold_clustering(blob.points, K, rounds=iterations, policy=policy)
    for j, b in enumerate(betas):
      schedule = ByzantineSchedule(beta=b, kind=EdgeOfBall())
      state = run_threshold_clustering(
        blob.points,
        K,
        rounds=iterations,
        policy=policy,
        byzantine=byzantine_mask(schedule, blob.points.shape[0], key),
        attack=schedule.kind,
        true_means=centers,
      )
      errors[j] += center_error(state, centers) / repeats
      if b == 0:
        matches = matches and np.array_equal(state.centers, clean.centers)
  for j, b in enumerate(betas):
    for k in range(K):
      outcome.add('threshold', iterations, k, f'center_error_beta{b:g}', errors[j, k])
    outcome.values[f'threshold.center_error_beta{b:g}'] = float(errors[j].mean())
  if 0 in betas:
    outcome.values['threshold.beta0_matches_clean'] = bool(matches)
