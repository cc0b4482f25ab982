"""Run configuration for the command-line interface."""

from __future__ import annotations

import os
from collections.abc import Mapping
from dataclasses import dataclass
from enum import StrEnum

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.verifiers import DEFAULT_BUDGET

BUDGET_ENV = "LTPG_BUDGET"
DEFAULT_MAX_NODES = 200_000


class OutputFormat(StrEnum):
    """How a command writes its payload to stdout."""

    JSON = "json"
    DOT = "dot"
    TABLE = "table"


@dataclass(frozen=True)
class RunConfig:
    """Parameters shared by every subcommand.

    Attributes:
        p: An odd prime.
        f: Residue degree, ``1 <= f <= 16``.
        e: Degree of the coefficient field over ``F_q``.
        output: Payload format.
        budget: Cap on the relation triples an exhaustive verifier visits.
        max_nodes: Cap on the strata a ``|>|>`` search materializes.
        seed: Seed for every sampled test.

    Raises:
        ValueError: If a field is out of range.
    """

    p: int
    f: int
    e: int = 1
    output: OutputFormat = OutputFormat.JSON
    budget: int = DEFAULT_BUDGET
    max_nodes: int = DEFAULT_MAX_NODES
    seed: int = 0

    def __post_init__(self) -> None:
        # PrimeParams validates p, f and e.
        _ = self.params
        if self.budget < 1:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if self.max_nodes < 1:
            raise ValueError(f"max_nodes must be positive, got {self.max_nodes}")

    @property
    def params(self) -> PrimeParams:
        return PrimeParams(self.p, self.f, self.e)

    @classmethod
    def from_env(
        cls,
        p: int,
        f: int,
        e: int = 1,
        output: OutputFormat = OutputFormat.JSON,
        seed: int = 0,
        environ: Mapping[str, str] | None = None,
    ) -> RunConfig:
        """Build a config, taking the budget from ``LTPG_BUDGET`` when set.

        Raises:
            ValueError: If ``LTPG_BUDGET`` is not a positive integer.
        """
        env: Mapping[str, str] = os.environ if environ is None else environ
        raw = env.get(BUDGET_ENV)
        budget = DEFAULT_BUDGET
        if raw is not None:
            try:
                budget = int(raw)
            except ValueError:
                message = f"{BUDGET_ENV} must be an integer, got {raw!r}"
                raise ValueError(message) from None
        return cls(p, f, e, output=output, budget=budget, seed=seed)
