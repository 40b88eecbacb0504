"""Named experiments: defaults, the per-seed study, and the checks computed from all seeds."""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import stats

from fedcluster.analysis.center import elbow_index
from fedcluster.errors import ConfigurationError
from fedcluster.experiments import studies
from fedcluster.experiments.config import ExperimentConfig, merge_config
from fedcluster.experiments.studies import SeedOutcome

logger = logging.getLogger(__name__)

Summary = tuple[dict[str, Any], dict[str, bool]]


@dataclass(frozen=True)
class Experiment:
  """A catalog entry.

  Attributes:
    name: Name used on the command line and in output paths.
    description: One line for `fedcluster list`.
    run_seed: Study run once per seed.
    summarize: Aggregates all seeds into (values, checks).
    algorithms: Default training loops.
    problem: Default problem and study parameters.
    trainer: Default shared TrainerConfig fields.
    overrides: Default per-algorithm TrainerConfig fields.
    seeds: Default seeds.
  """

  name: str
  description: str
  run_seed: Callable[[ExperimentConfig, int], SeedOutcome]
  summarize: Callable[[ExperimentConfig, list[SeedOutcome]], Summary]
  algorithms: tuple[str, ...] = ()
  problem: dict[str, Any] = field(default_factory=dict)
  trainer: dict[str, Any] = field(default_factory=dict)
  overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
  seeds: tuple[int, ...] = (0,)

  def resolve(self, cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill in the catalog defaults wherever cfg leaves a field unset."""
    base = ExperimentConfig(
      experiment=self.name,
      algorithms=list(self.algorithms),
      problem=dict(self.problem),
      trainer=dict(self.trainer),
      overrides={name: dict(fields) for name, fields in self.overrides.items()},
      seeds=list(self.seeds),
    )
    return merge_config(
      base,
      algorithms=cfg.algorithms or None,
      problem=cfg.problem,
      trainer=cfg.trainer,
      overrides=cfg.overrides,
      seeds=cfg.seeds,
      out_dir=cfg.out_dir,
      threads=cfg.threads,
      mlflow=cfg.mlflow,
    )


def _collect(outcomes: list[SeedOutcome], key: str) -> list[Any]:
  return [o.values[key] for o in outcomes if key in o.values]


def _mean(outcomes: list[SeedOutcome], key: str) -> float:
  values = _collect(outcomes, key)
  return float(np.mean(values)) if values else float('nan')


def _summarize_example1(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  values = {
    f'{a}.final_x': [_collect(outcomes, f'{a}.final_x{i}')[0] for i in (1, 2, 3)]
    for a in cfg.algorithms
  }
  checks = {}
  if 'myopic' in cfg.algorithms:
    checks['myopic_stuck_at_saddle'] = all(
      o.values['myopic.final_x2'] == 1.0 and o.values['myopic.final_x3'] == 2.0 for o in outcomes
    )
  if 'fc' in cfg.algorithms:
    checks['fc_recovers_client2'] = all(
      abs(o.values['fc.final_x2']) <= 1e-3 and o.values['fc.partition'] == [[0, 1], [2]]
      for o in outcomes
    )
  return values, checks


def _summarize_example2(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  values, checks = {}, {}
  for a in cfg.algorithms:
    values[f'{a}.final_x'] = [_collect(outcomes, f'{a}.final_x{i}')[0] for i in (1, 2)]
    if a.startswith('ifca'):
      values[f'{a}.max_abs_x2'] = max(_collect(outcomes, f'{a}.max_abs_x2'), default=float('nan'))
      checks[f'{a}_never_updates'] = values[f'{a}.max_abs_x2'] <= 1e-12 and all(
        _collect(outcomes, f'{a}.all_in_cluster2')
      )
  if 'fc' in cfg.algorithms:
    checks['fc_reaches_both_optima'] = all(
      abs(o.values['fc.final_x1'] + 0.5) <= 1e-4 and abs(o.values['fc.final_x2'] - 0.5) <= 1e-4
      for o in outcomes
    )
  return values, checks


def _summarize_example3(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  values, checks = {}, {}
  for a in cfg.algorithms:
    partitions = _collect(outcomes, f'{a}.partition')
    frequency = float(np.mean([p == [[0, 1], [2]] for p in partitions]))
    values[f'{a}.wrong_split_frequency'] = frequency
    checks[f'{a}_wrong_split_half_the_time'] = 0.43 <= frequency <= 0.57
  return values, checks


def _summarize_blobs(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  sizes = list(cfg.setting('n_i', [15, 30, 60]))
  errors = [_mean(outcomes, f'threshold.center_error_ni{n}') for n in sizes]
  oracle = [_mean(outcomes, f'threshold.oracle_error_ni{n}') for n in sizes]
  values: dict[str, Any] = {'n_i': sizes, 'center_error': errors, 'oracle_error': oracle}

  sigmas = list(cfg.setting('sigmas', [0.5, 1.0, 2.0, 4.0]))
  flatness = cfg.setting('elbow_flatness', 0.05)
  elbows = []
  for s in sigmas:
    curve = np.mean(_collect(outcomes, f'threshold.curve_sigma{s:g}'), axis=0)
    values[f'distance_sigma{s:g}'] = curve.tolist()
    elbows.append(elbow_index(curve, flatness))
  values['elbow'] = dict(zip([f'{s:g}' for s in sigmas], elbows))

  checks = {
    'error_decreases_with_n_i': bool(np.all(np.diff(errors) < 0)),
    'within_4x_of_oracle': errors[-1] <= 4 * oracle[-1],
    'elbow_nondecreasing_in_sigma': bool(np.all(np.diff(elbows) >= 0)),
  }
  return values, checks


def _summarize_lower_bound(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  error = _mean(outcomes, 'threshold.error_mu1')
  floor = _collect(outcomes, 'threshold.floor')[0]
  return {'error_mu1': error, 'floor': floor}, {'error_above_floor': error >= floor}


def _summarize_regression(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  sizes = list(cfg.setting('n_i', [4, 16]))
  values: dict[str, Any] = {
    f'{a}_ni{n}.test_loss': _mean(outcomes, f'{a}_ni{n}.test_loss')
    for n in sizes
    for a in cfg.algorithms
  }
  checks = {}
  small, large = sizes[0], sizes[-1]

  def loss(a: str, n: int) -> float:
    return values.get(f'{a}_ni{n}.test_loss', float('nan'))

  if {'gt', 'fc', 'local'} <= set(cfg.algorithms):
    checks['gt_le_fc_le_local'] = loss('gt', small) <= loss('fc', small) <= loss('local', small)
  if {'fc', 'global'} <= set(cfg.algorithms):
    checks['fc_beats_global'] = all(loss('fc', n) < loss('global', n) for n in sizes)
  if {'gt', 'fc'} <= set(cfg.algorithms) and large != small:
    shrinks = [
      o.values[f'fc_ni{large}.test_loss'] - o.values[f'gt_ni{large}.test_loss']
      < o.values[f'fc_ni{small}.test_loss'] - o.values[f'gt_ni{small}.test_loss']
      for o in outcomes
    ]
    values['gap_shrinks_fraction'] = float(np.mean(shrinks))
    checks['gap_shrinks_with_n_i'] = values['gap_shrinks_fraction'] >= 0.8
  return values, checks


def _summarize_assumptions(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  excess = _collect(outcomes, 'gt.intra_excess')
  separation = _collect(outcomes, 'gt.min_inter_sep')
  values: dict[str, Any] = {'intra_excess': excess, 'min_inter_sep': min(separation)}
  checks = {
    'intra_ratio_bounded': bool(np.all(np.asarray(excess) < 0.1)),
    'inter_separation_positive': min(separation) > 0,
  }
  for alpha in cfg.setting('alphas', [0.05, 0.1, 0.5]):
    variance = _mean(outcomes, f'momentum_probe.variance_alpha{alpha:g}')
    values[f'variance_alpha{alpha:g}'] = variance
    checks[f'momentum_variance_alpha{alpha:g}'] = variance <= 1.2 * alpha
  return values, checks


def _summarize_byzantine(cfg: ExperimentConfig, outcomes: list[SeedOutcome]) -> Summary:
  keys = sorted({k for o in outcomes for k in o.values if k.endswith('.test_loss')})
  values: dict[str, Any] = {k: _mean(outcomes, k) for k in keys}
  checks = {}
  attacked = {k.split('.')[0].split('_', 1)[1] for k in keys} - {'clean'}
  for tag in sorted(attacked):
    if 'fc' in cfg.algorithms:
      clean, hit = values['fc_clean.test_loss'], values[f'fc_{tag}.test_loss']
      checks[f'fc_robust_to_{tag}'] = hit <= 2 * clean
    if 'global' in cfg.algorithms:
      clean, hit = values['global_clean.test_loss'], values[f'global_{tag}.test_loss']
      checks[f'global_degrades_under_{tag}'] = hit >= 10 * clean

  betas = list(cfg.setting('betas', [0.0, 0.05, 0.1, 0.2]))
  errors = [_mean(outcomes, f'threshold.center_error_beta{b:g}') for b in betas]
  values['edge_of_ball'] = dict(zip([f'{b:g}' for b in betas], errors))
  checks['error_nondecreasing_in_beta'] = bool(np.all(np.diff(errors) >= 0))
  if len(betas) > 2:
    fit = stats.linregress(betas, errors)
    values['edge_of_ball_slope'] = float(fit.slope)
    values['edge_of_ball_r_squared'] = float(fit.rvalue**2)
    checks['error_linear_in_beta'] = values['edge_of_ball_r_squared'] >= 0.8
  if 0 in betas:
    checks['beta0_matches_clean'] = all(_collect(outcomes, 'threshold.beta0_matches_clean'))
  return values, checks


EXPERIMENTS: dict[str, Experiment] = {
  e.name: e
  for e in [
    Experiment(
      name='example1',
      description='Myopic-Clustering stuck at a saddle that Federated-Clustering escapes',
      run_seed=studies.example1,
      summarize=_summarize_example1,
      algorithms=('myopic', 'fc'),
      trainer={'eta': 0.5, 'rounds': 200, 'radius': 'percentile:20', 'clustering_rounds': 10},
      overrides={'fc': {'eta': 0.1, 'radius': 'fixed:5'}},
    ),
    Experiment(
      name='example2',
      description='IFCA models that never update versus Federated-Clustering',
      run_seed=studies.example2,
      summarize=_summarize_example2,
      algorithms=('ifca_i', 'ifca_ii', 'fc'),
      trainer={'eta': 0.1, 'rounds': 500, 'local_steps': 5, 'keep_trajectory': True},
      overrides={'fc': {'rounds': 200, 'radius': 'fixed:1', 'keep_trajectory': False}},
    ),
    Experiment(
      name='example3',
      description='Clustered-FL splitting the wrong pair of clients with probability 1/2',
      run_seed=studies.example3,
      summarize=_summarize_example3,
      algorithms=('cfl',),
      trainer={'eta': 0.1, 'rounds': 1, 'cfl_anchor': 'reference'},
      seeds=tuple(range(400)),
    ),
    Experiment(
      name='blobs',
      description='Threshold-Clustering center error against n_i, and elbows against sigma',
      run_seed=studies.blobs,
      summarize=_summarize_blobs,
      problem={
        'K': 2,
        'd': 10,
        'sigma': 1.0,
        'delta': 20.0,
        'n_i': [15, 30, 60],
        'sigmas': [0.5, 1.0, 2.0, 4.0],
        'elbow_K': 10,
        'elbow_per_cluster': 9,
        'elbow_percentile': 10,
        'elbow_flatness': 0.05,
      },
      trainer={'rounds': 25, 'clustering_rounds': 10},
      seeds=tuple(range(200)),
    ),
    Experiment(
      name='lower_bound',
      description='Threshold-Clustering error on the two-point mixture against its floor',
      run_seed=studies.lower_bound,
      summarize=_summarize_lower_bound,
      problem={'sigma': 1.0, 'gap': 2.0, 'n_per_component': 50, 'percentile': 20},
      trainer={'clustering_rounds': 10},
      seeds=tuple(range(500)),
    ),
    Experiment(
      name='synthetic_regression',
      description='Personalized test loss of every method as n_i grows',
      run_seed=studies.synthetic_regression,
      summarize=_summarize_regression,
      algorithms=('gt', 'fc', 'local', 'global', 'ifca_i'),
      problem={'K': 4, 'd': 10, 'n': 9, 'n_i': [4, 16], 'eta_scale': 1.0},
      trainer={
        'rounds': 400,
        'radius': 'percentile:15',
        'clustering_rounds': 10,
        'eval_every': 10,
      },
      seeds=tuple(range(20)),
    ),
    Experiment(
      name='assumption_trace',
      description='Intra-cluster ratio and inter-cluster separation along GT; momentum variance',
      run_seed=studies.assumption_trace,
      summarize=_summarize_assumptions,
      algorithms=('gt',),
      problem={'K': 4, 'n_i': 4, 'd': 10, 'n': 9, 'eta_scale': 1.0, 'start': 50},
      trainer={'rounds': 500},
      seeds=tuple(range(3)),
    ),
    Experiment(
      name='byzantine',
      description='Sign-flip and large-gradient attackers; edge-of-ball attackers on blobs',
      run_seed=studies.byzantine,
      summarize=_summarize_byzantine,
      algorithms=('fc', 'global'),
      problem={
        'K': 4,
        'n_i': 4,
        'd': 10,
        'n': 9,
        'eta_scale': 0.5,
        'beta': 0.25,
        'attacks': ['sign_flip', 'large_gradient:1e4'],
        'betas': [0.0, 0.05, 0.1, 0.2],
        'edge_repeats': 20,
      },
      trainer={
        'rounds': 100,
        'radius': 'percentile:20',
        'clustering_rounds': 10,
        'halt_on_divergence': False,
      },
      seeds=tuple(range(10)),
    ),
  ]
}


def get_experiment(name: str) -> Experiment:
  """Catalog entry registered under name."""
  try:
    return EXPERIMENTS[name]
  except KeyError:
    raise ConfigurationError(
      f'unknown experiment {name!r}; expected one of {", ".join(EXPERIMENTS)}'
    ) from None
