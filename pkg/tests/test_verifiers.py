"""Tests for the exhaustive verifiers."""

from __future__ import annotations

from typing import Any

import pytest

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.combinat import FSubset
from lt_phigamma.core.errors import BudgetExceededError
from lt_phigamma.core.strata import (
    DPair,
    Reducible,
    StrataGraph,
    reducible,
    rhd_closure,
    succ_d_targets,
)
from lt_phigamma.core.verifiers import (
    DEFAULT_BUDGET,
    VERIFIERS,
    VerificationReport,
    check_budget,
    verify_fernandodrei,
    verify_goldin,
    verify_marienmai,
    verify_ostersa,
    verify_tobbu,
    work_estimate,
)

GRID = [PrimeParams(3, 1), PrimeParams(3, 2), PrimeParams(5, 2)]
P33 = PrimeParams(3, 3)


def _rows(report: VerificationReport) -> list[dict[str, Any]]:
    return [dict(c) for c in report.counterexamples]


@pytest.fixture(scope="module")
def graph33() -> StrataGraph:
    return StrataGraph(P33)


class TestBudget:
    """Tests for the work estimate and its cap."""

    def test_estimate(self) -> None:
        assert work_estimate(PrimeParams(3, 2)) == 8 * 16

    def test_over_budget(self) -> None:
        with pytest.raises(BudgetExceededError, match="budget is 100"):
            check_budget(PrimeParams(3, 2), 100)

    @pytest.mark.parametrize("name", sorted(VERIFIERS))
    def test_verifiers_refuse_before_work(self, name: str) -> None:
        with pytest.raises(BudgetExceededError):
            VERIFIERS[name](PrimeParams(3, 2), 1)

    def test_default_budget_covers_f3(self) -> None:
        check_budget(P33, DEFAULT_BUDGET)


class TestReport:
    """Tests for the report container."""

    def test_json_shape(self) -> None:
        report = VerificationReport("x", PrimeParams(3, 1), 4, ({"a": 1},))
        assert not report.ok
        assert report.as_json() == {"checked": 4, "counterexamples": [{"a": 1}]}


class TestChainVerifiers:
    """Tests for the statements on the D-universe."""

    @pytest.mark.parametrize("params", GRID, ids=str)
    def test_tobbu(self, params: PrimeParams) -> None:
        report = verify_tobbu(params)
        assert report.checked > 0
        assert report.ok, report.counterexamples[:3]

    @pytest.mark.parametrize("params", GRID, ids=str)
    def test_ostersa(self, params: PrimeParams) -> None:
        report = verify_ostersa(params)
        assert report.checked == params.xi * 2**params.f * (params.q + 1)
        assert report.ok, report.counterexamples[:3]

    @pytest.mark.parametrize(
        "params", [PrimeParams(3, 1), PrimeParams(5, 2)], ids=str
    )
    def test_goldin(self, params: PrimeParams) -> None:
        report = verify_goldin(params)
        assert report.checked > 0
        assert report.ok, report.counterexamples[:3]

    def test_goldin_at_3_2(self) -> None:
        """Two maximal ``J^c`` where ``nu`` and ``mu`` disagree.

        ``ell_tilde = 5, J = {1}``: ``J^{c,1} = {1}`` and ``nu(1) = 1``, so
        ``Pi(nu(J^{c,1}) - 1) = {0}`` while ``mu({0}) = {1}``. The other is
        ``ell_tilde = 7, J = {0}`` with the indices swapped. Both are kept in
        the report rather than patched.
        """
        report = verify_goldin(PrimeParams(3, 2))
        by_ell = {c["ell_tilde"]: c for c in _rows(report)}
        assert sorted(by_ell) == [5, 7]
        assert by_ell[5]["J"] == [1]
        assert by_ell[5]["nu_shifted"] == [0]
        assert by_ell[5]["mu"] == [[1]]
        assert by_ell[7]["J"] == [0]
        assert by_ell[7]["nu_shifted"] == [1]
        assert by_ell[7]["mu"] == [[0]]
        assert all(c["injective"] for c in by_ell.values())

    @pytest.mark.slow
    def test_goldin_at_3_3(self) -> None:
        report = verify_goldin(P33)
        assert len(report.counterexamples) == 21


@pytest.mark.slow
class TestAtF3:
    """Runs at ``(p, f) = (3, 3)``, where a cyclic interval of ``F`` need not
    be a prefix or a suffix.

    Each statement keeps the direction that still holds there, and what
    fails is pinned by its shape.
    """

    def test_tobbu_chains(self) -> None:
        report = verify_tobbu(P33)
        assert report.checked > 0
        assert {c["part"] for c in _rows(report)} == {"b"}

    def test_ostersa_direct_implies_factored(self) -> None:
        rows = _rows(verify_ostersa(P33))
        assert rows
        for c in rows:
            assert c["factored"] and not c["direct"], c

    def test_marienmai_criterion_is_sound(self, graph33: StrataGraph) -> None:
        rows = _rows(verify_marienmai(P33, graph=graph33))
        assert rows
        for c in rows:
            assert c["reachable"] and not c["criterion"], c

    def test_fernandodrei_reducible_part(self, graph33: StrataGraph) -> None:
        rows = _rows(verify_fernandodrei(P33, graph=graph33))
        assert rows
        for c in rows:
            match c["part"]:
                case "b-target":
                    assert "h" in c["projection"], c
                case "b-source":
                    assert c["to"]["kind"] == "irr", c
                case part:
                    pytest.fail(f"unexpected part {part}")


class TestGraphVerifiers:
    """Tests for the statements comparing |> with >_J."""

    @pytest.mark.parametrize("params", GRID, ids=str)
    def test_marienmai(self, params: PrimeParams) -> None:
        report = verify_marienmai(params)
        assert report.ok, report.counterexamples[:3]

    @pytest.mark.parametrize("params", GRID, ids=str)
    def test_fernandodrei(self, params: PrimeParams) -> None:
        report = verify_fernandodrei(params)
        assert report.checked > 0
        assert report.ok, report.counterexamples[:3]

    @pytest.mark.parametrize("params", GRID, ids=str)
    def test_no_edge_onto_zero_with_support(self, params: PrimeParams) -> None:
        graph = StrataGraph(params)
        for e1 in graph.nodes:
            if not isinstance(e1, Reducible) or e1.ell == 0:
                continue
            for e2 in graph.successors[e1]:
                if isinstance(e2, Reducible) and e2.ell == 0:
                    assert e2.iset.is_empty(), (e1, e2)

    def test_zero_with_support_has_no_lift(self) -> None:
        params = PrimeParams(3, 2)
        full = FSubset.full(2)
        target = DPair(0, FSubset.of(2, [0]))
        assert target in succ_d_targets(params, DPair(2, full), FSubset.of(2, [0]))
        closure = rhd_closure(params, reducible(params, 2, 0, full))
        assert not any(
            isinstance(e, Reducible) and e.ell == 0 and not e.iset.is_empty()
            for e in closure
        )

    def test_shared_graph(self) -> None:
        params = PrimeParams(3, 2)
        graph = StrataGraph(params)
        first = verify_marienmai(params, graph=graph)
        second = verify_fernandodrei(params, graph=graph)
        assert first.ok and second.ok
        assert "successors" in vars(graph)
