import json

import numpy as np
import pandas as pd
import pytest

from fedcluster.algorithms.records import CSV_COLUMNS
from fedcluster.errors import ConfigurationError
from fedcluster.experiments.config import ExperimentConfig
from fedcluster.experiments.runner import EXIT_DIVERGED, EXIT_OK, run_experiment


def test_example1_checks(tmp_path):
  report = run_experiment(ExperimentConfig(experiment='example1', out_dir=tmp_path))
  assert report.checks == {'myopic_stuck_at_saddle': True, 'fc_recovers_client2': True}
  assert report.values['myopic.final_x'][1:] == [1.0, 2.0]
  assert report.exit_code == EXIT_OK
  assert report.csv_path('fc', 0).is_file()
  assert report.csv_path('myopic', 0).is_file()


def test_example2_checks(tmp_path):
  report = run_experiment(ExperimentConfig(experiment='example2', out_dir=tmp_path))
  assert report.passed, report.checks
  assert set(report.checks) == {
    'ifca_i_never_updates',
    'ifca_ii_never_updates',
    'fc_reaches_both_optima',
  }
  for name in ('ifca_i', 'ifca_ii'):
    assert report.values[f'{name}.final_x'] == [0.0, 0.0]


def test_outputs_layout(tmp_path):
  report = run_experiment(
    ExperimentConfig(experiment='example2', algorithms=['fc'], seeds=[3], out_dir=tmp_path)
  )
  frame = pd.read_csv(tmp_path / 'example2' / 'fc_seed3.csv')
  assert list(frame.columns) == CSV_COLUMNS
  assert set(frame['experiment']) == {'example2'}
  assert set(frame['seed']) == {3}
  assert frame['round'].max() == 200
  messages = frame[frame['metric'] == 'messages']
  assert messages['client'].eq(-1).all()
  assert messages[messages['round'] > 0]['value'].eq(4).all()

  summary = json.loads((tmp_path / 'example2' / 'summary.json').read_text())
  assert summary['experiment'] == 'example2'
  assert summary['seeds'] == [3]
  assert summary['checks'] == {'fc_reaches_both_optima': True}
  assert summary['results']['fc']['runs'] == 1
  assert summary['results']['fc']['messages'] == 800
  assert summary['diverged'] == []
  assert sorted(report.files) == sorted(tmp_path.joinpath('example2').iterdir())


def test_write_false_leaves_no_files(tmp_path):
  run_experiment(
    ExperimentConfig(experiment='example3', seeds=[0, 1], out_dir=tmp_path), write=False
  )
  assert not any(tmp_path.iterdir())


def test_outputs_independent_of_thread_count(tmp_path):
  def run(threads):
    cfg = ExperimentConfig(
      experiment='example3',
      seeds=list(range(12)),
      threads=threads,
      out_dir=tmp_path / f't{threads}',
    )
    return run_experiment(cfg)

  serial, pooled = run(1), run(4)
  assert serial.values == pooled.values
  for seed in range(12):
    assert serial.csv_path('cfl', seed).read_bytes() == pooled.csv_path('cfl', seed).read_bytes()


def test_divergence_keeps_partial_outputs(tmp_path):
  # eta = 5 on curvature 2 multiplies the error by -9 each round.
  cfg = ExperimentConfig(
    experiment='example2',
    algorithms=['fc'],
    trainer={'eta': 5.0},
    overrides={'fc': {'rounds': 400}},
    out_dir=tmp_path,
  )
  report = run_experiment(cfg)
  assert report.diverged == [('fc', 0)]
  assert report.exit_code == EXIT_DIVERGED
  assert report.checks == {'fc_reaches_both_optima': False}

  frame = pd.read_csv(report.csv_path('fc', 0))
  assert 0 < frame['round'].max() < 400
  summary = json.loads((tmp_path / 'example2' / 'summary.json').read_text())
  assert summary['diverged'] == [{'label': 'fc', 'seed': 0}]
  assert summary['results']['fc']['diverged'] == 1


def test_recorded_divergence_without_halting_still_exits_3(tmp_path):
  cfg = ExperimentConfig(
    experiment='example2',
    algorithms=['fc'],
    seeds=[0, 1],
    trainer={'eta': 5.0, 'halt_on_divergence': False},
    overrides={'fc': {'rounds': 400}},
    out_dir=tmp_path,
  )
  report = run_experiment(cfg)
  assert report.outcomes[0].records['fc'].diverged
  assert report.diverged == [('fc', 0), ('fc', 1)]
  assert report.exit_code == EXIT_DIVERGED

  frame = pd.read_csv(report.csv_path('fc', 1))
  assert 0 < frame['round'].max() < 400
  summary = json.loads((tmp_path / 'example2' / 'summary.json').read_text())
  assert summary['diverged'] == [{'label': 'fc', 'seed': 0}, {'label': 'fc', 'seed': 1}]
  assert summary['results']['fc']['diverged'] == 2


def test_unknown_experiment():
  with pytest.raises(ConfigurationError):
    run_experiment(ExperimentConfig(experiment='example9'))


@pytest.mark.slow
def test_example3_wrong_split_frequency(tmp_path):
  report = run_experiment(ExperimentConfig(experiment='example3', out_dir=tmp_path))
  assert len(report.outcomes) == 400
  assert report.checks == {'cfl_wrong_split_half_the_time': True}
  assert 0.43 <= report.values['cfl.wrong_split_frequency'] <= 0.57


@pytest.mark.slow
def test_blobs_error_scaling(tmp_path):
  cfg = ExperimentConfig(experiment='blobs', seeds=list(range(40)), out_dir=tmp_path)
  report = run_experiment(cfg, write=False)
  assert report.checks['error_decreases_with_n_i']
  assert report.checks['within_4x_of_oracle']
  assert np.all(np.asarray(report.values['center_error']) > 0)


@pytest.mark.slow
def test_lower_bound_floor(tmp_path):
  report = run_experiment(ExperimentConfig(experiment='lower_bound', out_dir=tmp_path))
  assert report.checks == {'error_above_floor': True}


@pytest.mark.slow
def test_byzantine_edge_of_ball(tmp_path):
  cfg = ExperimentConfig(
    experiment='byzantine',
    seeds=[0, 1],
    problem={'attacks': []},
    trainer={'rounds': 5},
    out_dir=tmp_path,
  )
  report = run_experiment(cfg, write=False)
  assert report.checks['beta0_matches_clean']
  assert set(report.values['edge_of_ball']) == {'0', '0.05', '0.1', '0.2'}


@pytest.mark.slow
def test_momentum_variance_probe(tmp_path):
  cfg = ExperimentConfig(experiment='assumption_trace', seeds=[0], out_dir=tmp_path)
  report = run_experiment(cfg, write=False)
  for alpha in (0.05, 0.1, 0.5):
    assert report.checks[f'momentum_variance_alpha{alpha:g}']
