"""Environment loading, logging setup and worker-pool sizing."""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from fedcluster.errors import ConfigurationError

ENV_FILE = '.env.local'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def load_env(start: Optional[Path] = None) -> Optional[Path]:
  """Load the nearest .env.local found walking up from start (the working directory).

  Variables already set in the process environment win.
  """
  current = (start or Path.cwd()).resolve()
  for directory in [current, *current.parents]:
    env_file = directory / ENV_FILE
    if env_file.is_file():
      load_dotenv(env_file)
      return env_file
  return None


def env_flag(name: str, default: bool = False) -> bool:
  """True when the variable reads "true" in any case."""
  return os.getenv(name, str(default)).lower() == 'true'


def configure_logging(verbose: bool = False) -> None:
  """Root logging to stderr; FEDCLUSTER_LOG_LEVEL sets the level unless verbose forces DEBUG."""
  level = 'DEBUG' if verbose else os.getenv('FEDCLUSTER_LOG_LEVEL', 'INFO').upper()
  logging.basicConfig(level=level, format=LOG_FORMAT, handlers=[logging.StreamHandler()])
  logging.getLogger().setLevel(level)
  # Quiet noisy third-party loggers
  logging.getLogger('urllib3').setLevel(logging.ERROR)
  logging.getLogger('mlflow').setLevel(logging.ERROR)


def thread_count(requested: Optional[int] = None) -> int:
  """Worker pool size: requested, else the CPU count, capped by FEDCLUSTER_THREADS."""
  cap = os.getenv('FEDCLUSTER_THREADS')
  count = requested or os.cpu_count() or 1
  if cap:
    try:
      limit = int(cap)
    except ValueError:
      raise ConfigurationError(f'FEDCLUSTER_THREADS must be an integer, got {cap!r}') from None
    if limit < 1:
      raise ConfigurationError(f'FEDCLUSTER_THREADS must be positive, got {limit}')
    count = min(count, limit)
  return count
