"""Tests for logging, worker, config and formatting helpers."""

import math
import os

import numpy as np
import pytest

from irl_core import THREADS_ENV_VAR
from irl_core.utils import (
    ConfigManager,
    format_number,
    load_config_file,
    log_spaced_ints,
    parse_override,
    resolve_workers,
)


class TestResolveWorkers:

    def test_requested(self):
        assert resolve_workers(3) == 3

    def test_default_is_cpu_count(self):
        assert resolve_workers() == (os.cpu_count() or 1)

    def test_environment_wins(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "2")
        assert resolve_workers(8) == 2

    @pytest.mark.parametrize("value", ["zero", "0", "-3"])
    def test_bad_environment_ignored(self, monkeypatch, caplog, value):
        monkeypatch.setenv(THREADS_ENV_VAR, value)
        assert resolve_workers(4) == 4
        assert THREADS_ENV_VAR in caplog.text


class TestConfigFiles:

    def test_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"n": 5, "m_grid": [10, 100]}')
        assert load_config_file(path) == {"n": 5, "m_grid": [10, 100]}

    def test_yaml(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("n: 5\nsolvers:\n  - l1_svm\n")
        assert load_config_file(path) == {"n": 5, "solvers": ["l1_svm"]}

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValueError):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config_file(tmp_path / "absent.json")


class TestConfigManager:

    def test_dotted_access(self):
        manager = ConfigManager({"solver": {"lam": 0.0}})
        manager.set("solver.r_max", 2.0)
        manager.set("plot.style.dash", "dot")
        assert manager.get("solver.r_max") == 2.0
        assert manager.get("plot.style.dash") == "dot"
        assert manager.get("solver.missing", 7) == 7

    def test_overrides_are_parsed(self):
        manager = ConfigManager({"trials": 100})
        manager.apply_overrides(["trials=20", "m_grid=[10, 100]", "fresh_instance=true", "out_csv=a.csv"])
        assert manager.to_dict() == {
            "trials": 20, "m_grid": [10, 100], "fresh_instance": True, "out_csv": "a.csv",
        }

    def test_override_needs_equals(self):
        with pytest.raises(ValueError):
            ConfigManager().apply_overrides(["trials"])

    def test_parse_override_scalars(self):
        assert parse_override("0.5") == 0.5
        assert parse_override("l1_svm") == "l1_svm"


class TestFormatting:

    @pytest.mark.parametrize("value,expected", [
        (None, "n/a"),
        (math.nan, "n/a"),
        (3, "3"),
        (np.int64(12), "12"),
        (math.inf, "inf"),
        (-math.inf, "-inf"),
        (0.123456, "0.1235"),
        (123456.0, "1.235e+05"),
    ])
    def test_format_number(self, value, expected):
        assert format_number(value) == expected

    def test_precision(self):
        assert format_number(math.pi, 2) == "3.1"

    def test_log_spaced_ints(self):
        assert log_spaced_ints(1, 1000, 4) == [1, 10, 100, 1000]
        assert log_spaced_ints(1, 3, 10) == [1, 2, 3]
        with pytest.raises(ValueError):
            log_spaced_ints(0, 10, 3)
