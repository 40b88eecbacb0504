"""Experiment configuration: YAML files validated into pydantic models, with CLI overrides."""

import logging
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

from fedcluster.algorithms import ALGORITHMS, TrainerConfig
from fedcluster.errors import ConfigurationError

logger = logging.getLogger(__name__)


class ExperimentConfig(BaseModel):
  """One experiment invocation.

  Dict-valued fields are merged over the catalog defaults of the experiment, key by key.

  Attributes:
    experiment: Catalog name.
    algorithms: Training loops to run; the catalog's defaults when empty.
    problem: Problem and study parameters.
    trainer: TrainerConfig fields shared by every algorithm.
    overrides: Per-algorithm TrainerConfig updates applied on top of trainer.
    seeds: Root seeds; the catalog's default range when omitted.
    out_dir: Output root; files go to out_dir/<experiment>/.
    threads: Worker pool size; FEDCLUSTER_THREADS or the CPU count when omitted.
    mlflow: Log every (algorithm, seed) run to MLflow.
  """

  model_config = ConfigDict(extra='forbid')

  experiment: str
  algorithms: list[str] = Field(default_factory=list)
  problem: dict[str, Any] = Field(default_factory=dict)
  trainer: dict[str, Any] = Field(default_factory=dict)
  overrides: dict[str, dict[str, Any]] = Field(default_factory=dict)
  seeds: Optional[list[int]] = None
  out_dir: Path = Path('results')
  threads: Optional[int] = Field(None, ge=1)
  mlflow: bool = False

  @field_validator('algorithms')
  @classmethod
  def _known_algorithms(cls, value: list[str]) -> list[str]:
    unknown = [name for name in value if name not in ALGORITHMS]
    if unknown:
      raise ValueError(f'unknown algorithms {unknown}; expected names from {sorted(ALGORITHMS)}')
    return value

  @field_validator('seeds')
  @classmethod
  def _nonempty_seeds(cls, value: Optional[list[int]]) -> Optional[list[int]]:
    if value is None:
      return value
    if not value:
      raise ValueError('seed list must not be empty')
    if min(value) < 0:
      raise ValueError(f'seeds must be nonnegative, got {value}')
    return value

  @property
  def output_dir(self) -> Path:
    """Directory holding this experiment's files."""
    return self.out_dir / self.experiment

  def setting(self, key: str, default: Any = None) -> Any:
    """A problem/study parameter."""
    return self.problem.get(key, default)

  def trainer_for(self, algorithm: str, seed: int, **updates: Any) -> TrainerConfig:
    """TrainerConfig of one algorithm: shared fields, computed updates, its overrides, the seed."""
    fields = {**self.trainer, **updates, **self.overrides.get(algorithm, {}), 'seed': seed}
    return TrainerConfig.model_validate(fields)


def load_config(path: str | Path) -> ExperimentConfig:
  """Read and validate an experiment YAML file.

  Raises:
    ConfigurationError: If the file is missing or is not a mapping.
    pydantic.ValidationError: If the mapping does not validate.
  """
  path = Path(path)
  if not path.is_file():
    raise ConfigurationError(f'config file {path} does not exist')
  with open(path, 'r') as f:
    data = yaml.safe_load(f) or {}
  if not isinstance(data, dict):
    raise ConfigurationError(f'{path} must hold a mapping, got {type(data).__name__}')
  logger.debug(f'loaded {path}: {sorted(data)}')
  return ExperimentConfig.model_validate(data)


def merge_config(base: ExperimentConfig, **updates: Any) -> ExperimentConfig:
  """Apply overrides on top of a config and revalidate.

  None values are ignored. Dict fields merge key by key; overrides merge per algorithm.
  """
  data = base.model_dump()
  for key, value in updates.items():
    if value is None:
      continue
    if key == 'overrides':
      for algorithm, fields in value.items():
        data['overrides'][algorithm] = {**data['overrides'].get(algorithm, {}), **fields}
    elif isinstance(data.get(key), dict):
      data[key] = {**data[key], **value}
    else:
      data[key] = value
  return ExperimentConfig.model_validate(data)


def parse_seeds(text: str) -> list[int]:
  """'7', '0..19' (inclusive) or '1,4,9'."""
  text = text.strip()
  try:
    if '..' in text:
      start, _, stop = text.partition('..')
      return list(range(int(start), int(stop) + 1))
    return [int(part) for part in text.split(',') if part.strip()]
  except ValueError as e:
    raise ConfigurationError(f'invalid seed list {text!r}') from e


def parse_floats(text: str) -> list[float]:
  """Comma-separated numbers, e.g. '0.5,1,2,4'."""
  try:
    return [float(part) for part in text.split(',') if part.strip()]
  except ValueError as e:
    raise ConfigurationError(f'invalid number list {text!r}') from e
