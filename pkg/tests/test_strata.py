"""Tests for strata, the relations on them and Serre weights."""

from __future__ import annotations

from functools import cache

import pytest

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.combinat import FSubset, digits_of
from lt_phigamma.core.errors import BudgetExceededError
from lt_phigamma.core.strata import (
    DClass,
    DPair,
    Irreducible,
    Reducible,
    StrataGraph,
    all_strata,
    cyclotomic_ell,
    explore_nu_fibers,
    irreducible,
    irreducible_target_h,
    minimal_supports,
    multiplicity,
    multiplicity_witnesses,
    projections,
    reducible,
    rhd,
    rhd_closure,
    rhd_successors,
    serre_weight,
    steinberg_weight,
    stratum_count,
    stratum_from_json,
    stratum_key,
    stratum_to_json,
    succ_d,
    succ_d_targets,
    succ_ell,
    target_ell,
    weight_set,
)

P31 = PrimeParams(3, 1)
P32 = PrimeParams(3, 2)
EMPTY2 = FSubset.empty(2)
FULL2 = FSubset.full(2)


@cache
def _graph(params: PrimeParams) -> StrataGraph:
    return StrataGraph(params)


# ---------------------------------------------------------------------------
# Canonical forms and JSON
# ---------------------------------------------------------------------------


class TestCanonicalForms:
    """Tests for the identifications on E-strata."""

    def test_swap_partners_coincide(self) -> None:
        assert reducible(P32, 5, 2, EMPTY2) == reducible(P32, 3, 5, EMPTY2)
        assert reducible(P32, 3, 5, EMPTY2) == Reducible(3, 5, EMPTY2)

    def test_nonempty_support_not_swapped(self) -> None:
        one = FSubset.of(2, [0])
        assert reducible(P32, 5, 2, one) != reducible(P32, 3, 5, one)

    def test_reduction_mod_xi(self) -> None:
        assert reducible(P32, 9, -1, FULL2) == Reducible(1, 7, FULL2)

    def test_support_on_wrong_f_rejected(self) -> None:
        with pytest.raises(ValueError, match="expected f=2"):
            reducible(P32, 1, 1, FSubset.full(3))

    def test_irreducible_orbit(self) -> None:
        assert irreducible(P32, 19) == irreducible(P32, 11) == Irreducible(11)
        assert irreducible(P32, 11 + 80) == Irreducible(11)

    def test_irreducible_rejects_split_class(self) -> None:
        with pytest.raises(ValueError, match="q \\+ 1 divides"):
            irreducible(P32, 20)

    def test_strata_count(self) -> None:
        assert len(all_strata(P31)) == 10
        assert len(all_strata(P32)) == 264
        assert stratum_count(P32) >= 264

    def test_sorted_reducible_first(self) -> None:
        keys = [stratum_key(e) for e in all_strata(P32)]
        assert keys == sorted(keys)
        assert keys[0][0] == 0 and keys[-1][0] == 1

    def test_projections(self) -> None:
        assert projections(P32, reducible(P32, 3, 5, EMPTY2)) == {
            DPair(3, EMPTY2),
            DPair(5, EMPTY2),
        }
        assert projections(P32, irreducible(P32, 11)) == {DClass(1), DClass(9)}


class TestStratumJson:
    """Tests for the stratum JSON forms."""

    def test_reducible(self) -> None:
        e = reducible(P32, 4, 0, FULL2)
        assert stratum_to_json(e) == {"kind": "red", "ell": 4, "u": 0, "I": [0, 1]}
        assert stratum_from_json(P32, stratum_to_json(e)) == e

    def test_irreducible(self) -> None:
        assert stratum_to_json(Irreducible(11)) == {"kind": "irr", "h": 11}
        assert stratum_from_json(P32, {"kind": "irr", "h": 19}) == Irreducible(11)

    def test_parsing_canonicalizes(self) -> None:
        data = {"kind": "red", "ell": 5, "u": 2, "I": []}
        assert stratum_from_json(P32, data) == reducible(P32, 3, 5, EMPTY2)

    @pytest.mark.parametrize(
        "data",
        [
            {"kind": "bogus"},
            {"kind": "irr", "h": "3"},
            {"kind": "red", "ell": 1, "u": 0, "I": [2]},
            {"kind": "red", "ell": 1, "u": 0, "I": 1},
            {"kind": "red", "ell": 1.5, "u": 0, "I": []},
        ],
    )
    def test_malformed(self, data: dict[str, object]) -> None:
        with pytest.raises(ValueError):
            stratum_from_json(P32, data)


# ---------------------------------------------------------------------------
# >_J on D-strata
# ---------------------------------------------------------------------------


class TestDRelations:
    """Tests for the relations on pairs and classes."""

    @pytest.mark.parametrize("ell", range(8))
    def test_target_ell_is_the_unique_successor(self, ell: int) -> None:
        for J in FSubset.all_subsets(2):
            bar = target_ell(P32, ell, J)
            assert [b for b in range(8) if succ_ell(P32, ell, b, J)] == [bar]

    def test_full_j_keeps_ell(self) -> None:
        # The signed sum over J = F is sum a_j p^j = -ell.
        for ell in range(8):
            assert target_ell(P32, ell, FULL2) == (-ell) % 8

    @pytest.mark.parametrize("ell", range(8))
    def test_targets_satisfy_relation(self, ell: int) -> None:
        for iset in FSubset.all_subsets(2):
            d1 = DPair(ell, iset)
            for J in FSubset.all_subsets(2):
                for d2 in succ_d_targets(P32, d1, J):
                    assert succ_d(P32, d1, d2, J)

    def test_multiplicity_is_witness_count(self) -> None:
        for ell in range(8):
            d = DPair(0, EMPTY2)
            witnesses = multiplicity_witnesses(P32, ell, d)
            assert multiplicity(P32, ell, d) == len(witnesses)
            assert len(set(witnesses)) == len(witnesses)

    def test_minimal_supports_are_antichains(self) -> None:
        for ell in range(8):
            for J in FSubset.all_subsets(2):
                mins = minimal_supports(P32, ell, DPair(2, FSubset.of(2, [0])), J)
                for a in mins:
                    assert not any(b != a and b.issubset(a) for b in mins)

    def test_nu_fibers_partition_witnesses(self) -> None:
        d = DPair(2, FSubset.of(2, [0]))
        fibers = explore_nu_fibers(P32, d)
        assert fibers
        for ell, by_image in fibers.items():
            grouped = sorted(J for Js in by_image.values() for J in Js)
            assert grouped == sorted(multiplicity_witnesses(P32, ell, d))


# ---------------------------------------------------------------------------
# |> on E-strata
# ---------------------------------------------------------------------------


class TestDegeneration:
    """Tests for the one-step degeneration and its closure."""

    def test_reflexive_on_reducibles(self) -> None:
        for e in all_strata(P32):
            if isinstance(e, Reducible):
                assert rhd(P32, e, e)

    def test_irreducible_only_reaches_itself(self) -> None:
        e = irreducible(P32, 11)
        assert rhd_successors(P32, e) == {e}

    def test_shrinking_support(self) -> None:
        src = reducible(P32, 4, 0, FULL2)
        for iset in FSubset.all_subsets(2):
            assert rhd(P32, src, reducible(P32, 4, 0, iset))

    def test_swap_onto_split(self) -> None:
        src = reducible(P32, 4, 1, FULL2)
        assert rhd(P32, src, reducible(P32, -4, 1 - 4, EMPTY2))

    def test_two_index_degeneration(self) -> None:
        src = reducible(P32, 4, 0, FULL2)
        assert rhd(P32, src, reducible(P32, 2, 3, FSubset.of(2, [0])))

    def test_collapse_onto_zero(self) -> None:
        src = reducible(P32, 6, 0, FSubset.of(2, [0]))
        assert rhd(P32, src, reducible(P32, 0, 1, EMPTY2))

    @pytest.mark.parametrize(
        "params",
        [P31, P32, PrimeParams(5, 1), PrimeParams(5, 2)],
        ids=str,
    )
    def test_zero_one_point_keeps_u(self, params: PrimeParams) -> None:
        empty = FSubset.empty(params.f)
        for x in range(params.f):
            point = FSubset.of(params.f, [x])
            for u in range(params.xi):
                src = reducible(params, 0, u, point)
                assert rhd_successors(params, src) == {
                    src,
                    reducible(params, 0, u, empty),
                }

    def test_no_collapse_from_zero_at_xi_2(self) -> None:
        # 0 + 2 p^i lies in xi Z for i = 2f, but ell_t = 0 has no collapse.
        src = reducible(P31, 0, 0, FSubset.full(1))
        assert 2 * P31.p ** (2 * P31.f) % P31.xi == 0
        assert not rhd(P31, src, reducible(P31, 0, 1, FSubset.empty(1)))

    def test_one_point_to_irreducible(self) -> None:
        h = irreducible_target_h(P32, 6, 0, 3)
        assert h == (-162) % 80
        src = reducible(P32, 6, 0, FSubset.of(2, [1]))
        assert rhd(P32, src, irreducible(P32, h))

    def test_excluded_irreducible_target(self) -> None:
        assert irreducible_target_h(P32, 0, 0, 0) is None
        assert irreducible_target_h(P32, 6, 0, 0) is None

    def test_budget(self) -> None:
        with pytest.raises(BudgetExceededError) as info:
            StrataGraph(P32, max_nodes=10)
        assert info.value.budget == 10

    def test_closure_matches_graph(self) -> None:
        graph = _graph(P32)
        for e in graph.nodes[::17]:
            assert graph.closure(e) == rhd_closure(P32, e)
            assert e in graph.closure(e)

    def test_reaching_inverts_closure(self) -> None:
        graph = _graph(P32)
        target = reducible(P32, 2, 3, FSubset.of(2, [0]))
        for src in graph.reaching(target):
            assert target in graph.closure(src)

    def test_edges_sorted(self) -> None:
        edges = _graph(P31).edges()
        keys = [(stratum_key(s), stratum_key(t)) for s, t in edges]
        assert keys == sorted(keys)


# ---------------------------------------------------------------------------
# Serre weights
# ---------------------------------------------------------------------------


class TestSerreWeights:
    """Tests for weights and weight sets."""

    def test_cyclotomic_anti_digits(self) -> None:
        assert digits_of(P32, cyclotomic_ell(P32)).a == (1, 1)

    @pytest.mark.parametrize("ell", range(8))
    def test_weight_determinant(self, ell: int) -> None:
        for u in range(8):
            w = serre_weight(P32, ell, u)
            assert not w.steinberg
            total = sum((a + d) * 3**i for i, (a, d) in enumerate(zip(w.a, w.d)))
            assert (-total) % 8 == u

    def test_steinberg_determinant(self) -> None:
        for u in range(8):
            w = steinberg_weight(P32, u)
            assert w.steinberg and w.a == (3, 3)
            total = sum((3 + d) * 3**i for i, d in enumerate(w.d))
            assert (-total) % 8 == u

    def test_weight_json(self) -> None:
        w = serre_weight(P32, 4, 0)
        assert w.as_json(2) == {
            "d": [1, 1],
            "a": [1, 1],
            "steinberg": False,
            "mult": 2,
        }

    def test_weight_sets_of_reducibles(self) -> None:
        graph = _graph(P32)
        for e in graph.nodes:
            if not isinstance(e, Reducible):
                continue
            weights = dict(weight_set(graph, e))
            assert serre_weight(P32, e.ell, e.u) in weights
            if not e.iset.is_empty():
                assert all(m >= 1 for m in weights.values())

    def test_weight_set_is_orbit_invariant(self) -> None:
        graph = _graph(P32)
        assert weight_set(graph, reducible(P32, 5, 2, EMPTY2)) == weight_set(
            graph, reducible(P32, 3, 5, EMPTY2)
        )
        assert weight_set(graph, irreducible(P32, 19)) == weight_set(
            graph, irreducible(P32, 11)
        )

    def test_steinberg_accompanies_cyclotomic(self) -> None:
        graph = _graph(P32)
        cyc = cyclotomic_ell(P32)
        e = reducible(P32, cyc, 0, FULL2)
        weights = dict(weight_set(graph, e))
        assert weights[steinberg_weight(P32, 0)] == weights[serre_weight(P32, cyc, 0)]

    def test_weight_sets_sorted(self) -> None:
        graph = _graph(P32)
        ws = weight_set(graph, reducible(P32, 2, 3, FSubset.of(2, [0])))
        assert [w for w, _ in ws] == sorted(w for w, _ in ws)
