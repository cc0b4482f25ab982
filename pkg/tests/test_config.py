"""Tests for the run configuration."""

from __future__ import annotations

import pytest

from lt_phigamma.app.config import BUDGET_ENV, OutputFormat, RunConfig
from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.verifiers import DEFAULT_BUDGET


class TestRunConfig:
    """Tests for field validation."""

    def test_defaults(self) -> None:
        cfg = RunConfig(3, 2)
        assert cfg.params == PrimeParams(3, 2)
        assert cfg.output is OutputFormat.JSON
        assert cfg.budget == DEFAULT_BUDGET
        assert cfg.seed == 0

    @pytest.mark.parametrize(("p", "f"), [(2, 1), (9, 1), (3, 0), (3, 17)])
    def test_bad_prime_data(self, p: int, f: int) -> None:
        with pytest.raises(ValueError):
            RunConfig(p, f)

    def test_bad_budget(self) -> None:
        with pytest.raises(ValueError, match="budget must be positive"):
            RunConfig(3, 1, budget=0)

    def test_bad_max_nodes(self) -> None:
        with pytest.raises(ValueError, match="max_nodes must be positive"):
            RunConfig(3, 1, max_nodes=0)


class TestFromEnv:
    """Tests for reading the budget from the environment."""

    def test_unset(self) -> None:
        assert RunConfig.from_env(3, 1, environ={}).budget == DEFAULT_BUDGET

    def test_set(self) -> None:
        cfg = RunConfig.from_env(5, 2, seed=4, environ={BUDGET_ENV: "1000"})
        assert cfg.budget == 1000
        assert cfg.seed == 4

    def test_not_an_integer(self) -> None:
        with pytest.raises(ValueError, match="LTPG_BUDGET must be an integer"):
            RunConfig.from_env(3, 1, environ={BUDGET_ENV: "lots"})

    def test_not_positive(self) -> None:
        with pytest.raises(ValueError, match="budget must be positive"):
            RunConfig.from_env(3, 1, environ={BUDGET_ENV: "-5"})

    def test_process_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(BUDGET_ENV, "77")
        assert RunConfig.from_env(3, 1).budget == 77
