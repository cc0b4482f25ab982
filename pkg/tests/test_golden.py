"""Tests against the stored digit tables for p = 3, f = 2."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.combinat import (
    de_split,
    digit_type,
    digits_of,
    e_set_from_anti_digits,
)
from lt_phigamma.core.exponents import cyclotomic_point
from lt_phigamma.core.strata import all_strata, cyclotomic_ell

GOLDEN = json.loads((Path(__file__).parent / "golden" / "f2_tables.json").read_text())
PARAMS = PrimeParams(GOLDEN["p"], GOLDEN["f"])
ROWS: list[dict[str, object]] = GOLDEN["rows"]


@pytest.mark.parametrize("row", ROWS, ids=lambda row: f"ell={row['ell']}")
class TestDigitTables:
    """Tests for digits, D/E splits and digit types."""

    def test_digits(self, row: dict[str, object]) -> None:
        d = digits_of(PARAMS, int(str(row["ell"])))
        assert list(d.m) == row["m"]
        assert list(d.a) == row["a"]

    def test_split(self, row: dict[str, object]) -> None:
        ell = int(str(row["ell"]))
        D, E = de_split(PARAMS, ell)
        assert D.as_json() == row["D"]
        assert E.as_json() == row["E"]
        assert e_set_from_anti_digits(PARAMS, ell) == E

    def test_type(self, row: dict[str, object]) -> None:
        ell = int(str(row["ell"]))
        if row["type"] is None:
            assert ell == 0
            return
        assert digit_type(PARAMS, ell) == row["type"]


class TestSummary:
    """Tests for the scalar entries."""

    def test_cyclotomic(self) -> None:
        assert cyclotomic_point(PARAMS) == GOLDEN["cyclotomic_ell"]
        assert cyclotomic_ell(PARAMS) == GOLDEN["cyclotomic_ell"]

    def test_strata(self) -> None:
        assert len(all_strata(PARAMS)) == GOLDEN["strata"]
