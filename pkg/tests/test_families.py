"""Tests for degeneration families and their fibres."""

from __future__ import annotations

import pytest

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.combinat import FSubset
from lt_phigamma.core.errors import InfeasiblePresentationError
from lt_phigamma.core.families import (
    FamilyKind,
    ell_bar_of,
    family_change_ell,
    family_edges_report,
    family_fiber,
    family_report,
    family_specs,
    family_to_irreducible,
    rhd_edges_from_families,
)
from lt_phigamma.core.presentation import (
    IrreduciblePresentation,
    ReduciblePresentation,
    ZeroPresentation,
    stratum_of,
)
from lt_phigamma.core.strata import Reducible, irreducible, reducible, rhd

P31 = PrimeParams(3, 1)
P32 = PrimeParams(3, 2)
P52 = PrimeParams(5, 2)
FULL2 = FSubset.full(2)


# ---------------------------------------------------------------------------
# Towards irreducibles
# ---------------------------------------------------------------------------


class TestToIrreducible:
    """Tests for the one-index families."""

    def test_d_family_parameters(self) -> None:
        spec = family_to_irreducible(P32, 6, 0, 3)
        assert spec.kind is FamilyKind.TO_IRREDUCIBLE_D
        assert spec.w == 162
        assert spec.n_x == 19
        assert spec.n_y == 144
        assert spec.source == reducible(P32, 6, 0, FSubset.of(2, [1]))
        assert spec.target == irreducible(P32, -162)
        assert spec.ok

    def test_d_family_slope_is_xi(self) -> None:
        spec = family_to_irreducible(P32, 6, 0, 3)
        fiber = family_fiber(spec, 0)
        assert isinstance(fiber, IrreduciblePresentation)
        assert fiber.nu == P32.xi

    def test_split_exception_lands_on_ell_zero(self) -> None:
        spec = family_to_irreducible(P32, 6, 2, 0)
        assert spec.kind is FamilyKind.TO_IRREDUCIBLE_E
        assert spec.target == reducible(P32, 0, 3, FSubset.empty(2))
        assert stratum_of(family_fiber(spec, 0)) == spec.target

    def test_index_of_wrong_type_rejected(self) -> None:
        with pytest.raises(ValueError, match="selects no family"):
            family_to_irreducible(P32, 6, 0, 1)

    def test_zero_source_rejected(self) -> None:
        with pytest.raises(ValueError, match="non-zero"):
            family_to_irreducible(P32, 0, 0, 2)

    @pytest.mark.parametrize("params", [P31, P32, P52])
    def test_every_one_index_family_passes_its_checks(
        self, params: PrimeParams
    ) -> None:
        specs = [
            s
            for s in family_specs(params)
            if s.kind in (FamilyKind.TO_IRREDUCIBLE_D, FamilyKind.TO_IRREDUCIBLE_E)
        ]
        assert specs
        assert all(s.ok for s in specs)

    def test_d_family_w_never_divisible_by_q_plus_one(self) -> None:
        for spec in family_specs(P32):
            if spec.kind is FamilyKind.TO_IRREDUCIBLE_D:
                assert spec.w % (P32.q + 1) != 0


# ---------------------------------------------------------------------------
# Towards reducibles
# ---------------------------------------------------------------------------


class TestChangeEll:
    """Tests for the two-index families."""

    def test_worked_example(self) -> None:
        spec = family_change_ell(P32, 4, 0, FULL2, 4, 5)
        assert spec.kind is FamilyKind.REDUCIBLE_CHANGE
        assert spec.w == 81
        assert spec.n_x == spec.n_y == 109
        assert spec.ell_bar == 2
        assert spec.target == reducible(P32, 2, 3, FSubset.of(2, [0]))
        assert spec.ok

    def test_slope_identity_is_exact(self) -> None:
        spec = family_change_ell(P32, 4, 0, FULL2, 4, 5)
        check = next(c for c in spec.checks if c.name == "slope-identity")
        assert check.passed
        assert check.detail == "-324 == -324"

    def test_target_matches_rhd(self) -> None:
        spec = family_change_ell(P32, 4, 5, FULL2, 4, 5)
        assert rhd(P32, spec.source, spec.target)

    def test_ell_bar_zero_redirects(self) -> None:
        assert ell_bar_of(P32, 2, 4, 5) == 0
        with pytest.raises(ValueError, match="ell_bar = 0"):
            family_change_ell(P32, 2, 0, FULL2, 4, 5)

    def test_index_range_enforced(self) -> None:
        with pytest.raises(ValueError, match="i1 < i2"):
            family_change_ell(P32, 4, 0, FULL2, 3, 4)

    def test_support_must_contain_both_indices(self) -> None:
        with pytest.raises(ValueError, match="must lie in the support"):
            family_change_ell(P32, 4, 0, FSubset.of(2, [0]), 4, 5)

    def test_unknown_alpha_index_rejected(self) -> None:
        with pytest.raises(ValueError, match="alpha indices"):
            family_change_ell(P32, 4, 0, FULL2, 4, 5, alphas={7: 1})

    def test_zero_variant(self) -> None:
        spec = family_change_ell(P32, 0, 0, FULL2, 2, 3)
        assert spec.kind is FamilyKind.REDUCIBLE_CHANGE_ZERO
        assert spec.w == 18
        assert spec.n_x == 25
        assert spec.ell_bar == 4
        assert spec.target == reducible(P32, 4, 6, FSubset.of(2, [1]))
        assert spec.ok

    def test_zero_variant_default_b_is_inverse_non_square(self) -> None:
        spec = family_change_ell(P32, 0, 0, FULL2, 2, 3)
        ctx = spec.field
        assert not ctx.is_square(ctx.inv(spec.b))

    def test_zero_variant_excluded_tau(self) -> None:
        spec = family_change_ell(P32, 0, 0, FULL2, 2, 3, a=1, b=1)
        with pytest.raises(ValueError, match="excluded locus"):
            family_fiber(spec, 1)

    def test_known_identity_failures_at_3_2(self) -> None:
        report = family_report(P32)
        assert report.checked == 26
        failing: list[tuple[object, object, object]] = []
        for c in report.counterexamples:
            source = c["source"]
            indices = c["indices"]
            assert isinstance(source, dict) and isinstance(indices, list)
            failing.append((source["ell"], tuple(indices), c["check"]))
        failing.sort(key=repr)
        assert failing == [(5, (4, 5), "target-head"), (7, (5, 6), "target-head")]

    def test_identities_hold_at_5_2(self) -> None:
        assert family_report(P52).ok


# ---------------------------------------------------------------------------
# Fibres
# ---------------------------------------------------------------------------


class TestFibers:
    """Tests for the fibres at tau = 0 and tau != 0."""

    @pytest.mark.parametrize("params", [P32, P52])
    def test_generic_fiber_lies_in_source(self, params: PrimeParams) -> None:
        for spec in family_specs(params, u_tilde=3):
            fiber = family_fiber(spec, 1)
            assert stratum_of(fiber) == spec.source

    @pytest.mark.parametrize("params", [P32, P52])
    def test_special_fiber_lies_below_target(self, params: PrimeParams) -> None:
        for spec in family_specs(params, u_tilde=3):
            stratum = stratum_of(family_fiber(spec, 0))
            target = spec.target
            if isinstance(target, Reducible) and spec.ell_bar:
                allowed = {
                    reducible(params, target.ell, target.u, sub)
                    for sub in FSubset.all_subsets(params.f)
                    if sub.issubset(target.iset)
                }
                assert stratum in allowed
            else:
                assert stratum == target

    def test_fiber_shapes(self) -> None:
        spec = family_change_ell(P32, 4, 0, FULL2, 4, 5)
        assert isinstance(family_fiber(spec, 0), ReduciblePresentation)
        assert isinstance(family_fiber(spec, 2), ReduciblePresentation)
        zero = family_change_ell(P32, 0, 0, FULL2, 2, 3)
        assert isinstance(family_fiber(zero, 2), ZeroPresentation)
        assert isinstance(family_fiber(zero, 0), ReduciblePresentation)

    def test_tau_outside_field_rejected(self) -> None:
        spec = family_to_irreducible(P32, 6, 0, 3)
        with pytest.raises(ValueError, match="not an element"):
            family_fiber(spec, 9)

    def test_explicit_alphas_keep_generic_fiber_in_source(self) -> None:
        params = PrimeParams(3, 3)
        base = next(s for s in family_specs(params) if s.alphas)
        assert isinstance(base.source, Reducible)
        i1, i2 = base.indices
        spec = family_change_ell(
            params,
            base.source.ell,
            base.source.u,
            base.source.iset,
            i1,
            i2,
            alphas={i: 2 for i, _ in base.alphas},
        )
        assert all(c == 2 for _, c in spec.alphas)
        try:
            fiber = family_fiber(spec, 1)
        except InfeasiblePresentationError:
            pytest.fail("generic fibre must be feasible")
        assert stratum_of(fiber) == spec.source


# ---------------------------------------------------------------------------
# Edges
# ---------------------------------------------------------------------------


class TestEdges:
    """Tests for the family edges against |>."""

    @pytest.mark.parametrize("params", [P31, P32, P52])
    def test_edges_agree_with_rhd(self, params: PrimeParams) -> None:
        report = family_edges_report(params)
        assert report.ok, report.counterexamples[:3]

    def test_split_edge_present(self) -> None:
        edges = rhd_edges_from_families(P32)
        wanted = (
            reducible(P32, 6, 4, FSubset.of(2, [0])),
            reducible(P32, 0, 5, FSubset.empty(2)),
        )
        assert any((e.source, e.target) == wanted for e in edges)

    def test_edges_sorted_and_unique(self) -> None:
        edges = rhd_edges_from_families(P32)
        assert len(edges) == len(set(edges))
