import logging
import os

import pytest

from fedcluster.errors import ConfigurationError
from fedcluster.utils.env import configure_logging, env_flag, load_env, thread_count


def test_thread_count(monkeypatch):
  monkeypatch.delenv('FEDCLUSTER_THREADS', raising=False)
  assert thread_count(3) == 3
  assert thread_count() == (os.cpu_count() or 1)

  monkeypatch.setenv('FEDCLUSTER_THREADS', '2')
  assert thread_count(8) == 2
  assert thread_count(1) == 1

  for bad in ('two', '0'):
    monkeypatch.setenv('FEDCLUSTER_THREADS', bad)
    with pytest.raises(ConfigurationError):
      thread_count(4)


def test_load_env_walks_up(tmp_path, monkeypatch):
  monkeypatch.delenv('FEDCLUSTER_TEST_VALUE', raising=False)
  (tmp_path / '.env.local').write_text('FEDCLUSTER_TEST_VALUE=from-file\n')
  nested = tmp_path / 'a' / 'b'
  nested.mkdir(parents=True)
  assert load_env(nested) == tmp_path / '.env.local'
  assert os.environ['FEDCLUSTER_TEST_VALUE'] == 'from-file'
  monkeypatch.delenv('FEDCLUSTER_TEST_VALUE')


def test_load_env_keeps_process_values(tmp_path, monkeypatch):
  monkeypatch.setenv('FEDCLUSTER_TEST_VALUE', 'from-shell')
  (tmp_path / '.env.local').write_text('FEDCLUSTER_TEST_VALUE=from-file\n')
  load_env(tmp_path)
  assert os.environ['FEDCLUSTER_TEST_VALUE'] == 'from-shell'


def test_env_flag(monkeypatch):
  monkeypatch.setenv('FEDCLUSTER_MLFLOW', 'True')
  assert env_flag('FEDCLUSTER_MLFLOW')
  monkeypatch.setenv('FEDCLUSTER_MLFLOW', 'yes')
  assert not env_flag('FEDCLUSTER_MLFLOW')
  monkeypatch.delenv('FEDCLUSTER_MLFLOW')
  assert env_flag('FEDCLUSTER_MLFLOW', default=True)


def test_configure_logging(monkeypatch):
  monkeypatch.setenv('FEDCLUSTER_LOG_LEVEL', 'warning')
  configure_logging()
  assert logging.getLogger().level == logging.WARNING
  configure_logging(verbose=True)
  assert logging.getLogger().level == logging.DEBUG
  assert logging.getLogger('mlflow').level == logging.ERROR
