"""Command line: `fedcluster list` and `fedcluster run <experiment>`."""

import argparse
import json
import logging
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from fedcluster.errors import ConfigurationError, PreconditionError
from fedcluster.experiments.catalog import EXPERIMENTS
from fedcluster.experiments.config import (
  ExperimentConfig,
  load_config,
  merge_config,
  parse_floats,
  parse_seeds,
)
from fedcluster.experiments.runner import EXIT_OK, EXIT_USAGE, ExperimentReport, run_experiment
from fedcluster.utils.env import configure_logging, env_flag, load_env

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
  """Argument parser for the `list` and `run` subcommands."""
  parser = argparse.ArgumentParser(
    prog='fedcluster', description='Gradient-clustering federated learning experiments.'
  )
  commands = parser.add_subparsers(dest='command', required=True)

  listing = commands.add_parser('list', help='show the experiment catalog')
  listing.add_argument('--json', action='store_true', help='machine-readable listing')

  run = commands.add_parser('run', help='run one experiment')
  run.add_argument('experiment', help='catalog name, see `fedcluster list`')
  run.add_argument('--config', type=Path, help='YAML config; flags override its keys')
  seeds = run.add_mutually_exclusive_group()
  seeds.add_argument('--seed', type=int, help='single seed')
  seeds.add_argument('--seeds', help="inclusive range 'A..B' or list 'a,b,c'")
  run.add_argument('--algos', help='comma-separated training loops')
  run.add_argument('--out', type=Path, help='output root (default: results)')
  run.add_argument('--eta', type=float, help='step size shared by every algorithm')
  run.add_argument('--rounds', type=int, help='training rounds (clustering iterations for blobs)')
  run.add_argument('--sigma', help='comma-separated sigma sweep')
  run.add_argument('--beta', help='comma-separated Byzantine fraction sweep')
  run.add_argument('--threads', type=int, help='worker pool size (capped by FEDCLUSTER_THREADS)')
  run.add_argument('--mlflow', action='store_true', help='log runs to MLflow')
  run.add_argument('-v', '--verbose', action='store_true', help='debug logging')
  return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
  """Config file (if any) with the command-line flags applied on top."""
  if args.config is not None:
    base = load_config(args.config)
    if base.experiment != args.experiment:
      raise ConfigurationError(
        f'{args.config} configures {base.experiment!r}, not {args.experiment!r}'
      )
  else:
    base = ExperimentConfig(experiment=args.experiment)

  trainer = {}
  if args.eta is not None:
    trainer['eta'] = args.eta
  if args.rounds is not None:
    trainer['rounds'] = args.rounds
  problem = {}
  if args.sigma is not None:
    problem['sigmas'] = parse_floats(args.sigma)
  if args.beta is not None:
    problem['betas'] = parse_floats(args.beta)

  seeds = None
  if args.seed is not None:
    seeds = [args.seed]
  elif args.seeds is not None:
    seeds = parse_seeds(args.seeds)
  algorithms = None
  if args.algos is not None:
    algorithms = [name.strip() for name in args.algos.split(',') if name.strip()]

  return merge_config(
    base,
    algorithms=algorithms,
    seeds=seeds,
    trainer=trainer or None,
    problem=problem or None,
    out_dir=args.out,
    threads=args.threads,
    mlflow=True if args.mlflow or env_flag('FEDCLUSTER_MLFLOW') else None,
  )


def list_experiments(as_json: bool = False, console: Optional[Console] = None) -> int:
  """Print the catalog."""
  if as_json:
    listing = [
      {
        'name': e.name,
        'description': e.description,
        'algorithms': list(e.algorithms),
        'seeds': len(e.seeds),
      }
      for e in EXPERIMENTS.values()
    ]
    print(json.dumps(listing, indent=2))
    return EXIT_OK

  table = Table(title='fedcluster experiments')
  table.add_column('name', no_wrap=True)
  table.add_column('algorithms')
  table.add_column('seeds', justify='right')
  table.add_column('description')
  for e in EXPERIMENTS.values():
    table.add_row(e.name, ','.join(e.algorithms) or '-', str(len(e.seeds)), e.description)
  (console or Console()).print(table)
  return EXIT_OK


def print_report(report: ExperimentReport, console: Optional[Console] = None) -> None:
  """Check table and divergence notes of a finished run."""
  console = console or Console()
  cfg = report.config
  table = Table(title=f'{cfg.experiment}: {len(cfg.seeds)} seeds in {report.wall_clock:.1f}s')
  table.add_column('check', no_wrap=True)
  table.add_column('result')
  for name, ok in report.checks.items():
    table.add_row(name, '[green]pass[/green]' if ok else '[red]FAIL[/red]')
  console.print(table)
  for label, seed in report.diverged:
    console.print(f'[yellow]{label} diverged for seed {seed}[/yellow]')
  if report.files:
    console.print(f'outputs in {cfg.output_dir}')


def main(argv: Optional[Sequence[str]] = None) -> int:
  """Entry point; returns the process exit code."""
  args = build_parser().parse_args(argv)
  load_env()
  configure_logging(getattr(args, 'verbose', False))
  if args.command == 'list':
    return list_experiments(as_json=args.json)

  try:
    report = run_experiment(config_from_args(args))
  except ValidationError as e:
    logger.error(f'invalid configuration: {e}')
    return EXIT_USAGE
  except (ConfigurationError, PreconditionError) as e:
    logger.error(str(e))
    return EXIT_USAGE
  print_report(report)
  return report.exit_code
