"""Tests for exact field, Witt-ring and series arithmetic."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lt_phigamma.core.arith import (
    LaurentPoly,
    PrimeParams,
    TruncSeries,
    WittRing,
    binomial_mod_p,
    field_make,
    least_irreducible,
    p_valuation,
    series_compose,
    solve_linear,
    witt_make,
)
from lt_phigamma.core.errors import PrecisionError

FIELDS = [(3, 1, 1), (3, 2, 1), (5, 1, 1), (5, 2, 1), (3, 1, 2), (7, 1, 1)]


@st.composite
def field_triples(draw: st.DrawFn) -> tuple[int, int, int, int, int, int]:
    """A small field with three of its elements."""
    p, f, e = draw(st.sampled_from(FIELDS))
    size = p ** (f * e)
    a, b, c = (draw(st.integers(0, size - 1)) for _ in range(3))
    return p, f, e, a, b, c


# ---------------------------------------------------------------------------
# PrimeParams
# ---------------------------------------------------------------------------


class TestPrimeParams:
    """Tests for the residue data."""

    def test_derived_quantities(self) -> None:
        params = PrimeParams(3, 2)
        assert params.q == 9
        assert params.xi == 8

    @pytest.mark.parametrize("p", [2, 4, 9, 1])
    def test_rejects_bad_prime(self, p: int) -> None:
        with pytest.raises(ValueError, match="odd prime"):
            PrimeParams(p, 1)

    @pytest.mark.parametrize("f", [0, 17])
    def test_rejects_bad_degree(self, f: int) -> None:
        with pytest.raises(ValueError, match=r"f must lie in \[1, 16\]"):
            PrimeParams(3, f)

    def test_rejects_bad_extension(self) -> None:
        with pytest.raises(ValueError, match="e must be positive"):
            PrimeParams(3, 1, 0)


# ---------------------------------------------------------------------------
# Finite fields
# ---------------------------------------------------------------------------


class TestFieldContext:
    """Tests for table-driven finite fields."""

    def test_least_irreducible(self) -> None:
        assert least_irreducible(3, 1) == (0, 1)
        assert least_irreducible(3, 2) == (1, 0, 1)

    def test_least_irreducible_rejects_composite(self) -> None:
        with pytest.raises(ValueError, match="not prime"):
            least_irreducible(9, 2)

    def test_contexts_are_cached(self) -> None:
        assert field_make(5, 2) is field_make(5, 2)

    def test_too_large_field_rejected(self) -> None:
        with pytest.raises(ValueError, match="exceeds"):
            field_make(3, 7)

    @given(field_triples())
    @settings(max_examples=200, deadline=None)
    def test_ring_axioms(self, data: tuple[int, int, int, int, int, int]) -> None:
        p, f, e, a, b, c = data
        ctx = field_make(p, f, e)
        assert ctx.add(a, b) == ctx.add(b, a)
        assert ctx.mul(a, b) == ctx.mul(b, a)
        assert ctx.mul(a, ctx.add(b, c)) == ctx.add(ctx.mul(a, b), ctx.mul(a, c))
        assert ctx.mul(ctx.mul(a, b), c) == ctx.mul(a, ctx.mul(b, c))
        assert ctx.sub(ctx.add(a, b), b) == a
        assert ctx.add(a, ctx.neg(a)) == 0

    @given(field_triples())
    @settings(max_examples=100, deadline=None)
    def test_inverse(self, data: tuple[int, int, int, int, int, int]) -> None:
        p, f, e, a, _, _ = data
        ctx = field_make(p, f, e)
        if a == 0:
            with pytest.raises(ZeroDivisionError):
                ctx.inv(a)
        else:
            assert ctx.mul(a, ctx.inv(a)) == 1
            assert ctx.pow(a, -1) == ctx.inv(a)

    @pytest.mark.parametrize(("p", "f", "e"), FIELDS)
    def test_generator_is_primitive(self, p: int, f: int, e: int) -> None:
        ctx = field_make(p, f, e)
        g = ctx.generator
        order = ctx.size - 1
        powers = {ctx.pow(g, n) for n in range(order)}
        assert powers == set(ctx.units())

    @pytest.mark.parametrize(("p", "f", "e"), FIELDS)
    def test_frobenius_is_additive(self, p: int, f: int, e: int) -> None:
        ctx = field_make(p, f, e)
        for a in ctx.elements():
            for b in (1, ctx.size - 1):
                lhs = ctx.pow(ctx.add(a, b), p)
                assert lhs == ctx.add(ctx.pow(a, p), ctx.pow(b, p))

    @pytest.mark.parametrize(("p", "f", "e"), FIELDS)
    def test_squares(self, p: int, f: int, e: int) -> None:
        ctx = field_make(p, f, e)
        squares = {ctx.mul(a, a) for a in ctx.elements()}
        assert {a for a in ctx.elements() if ctx.is_square(a)} == squares
        assert len(squares) == (ctx.size + 1) // 2
        for a in squares:
            r = ctx.sqrt(a)
            assert ctx.mul(r, r) == a
        ns = ctx.non_square()
        assert ns is not None and not ctx.is_square(ns)

    def test_sqrt_of_non_square_raises(self) -> None:
        ctx = field_make(3, 1)
        with pytest.raises(ValueError, match="not a square"):
            ctx.sqrt(2)

    def test_embedding_is_a_ring_map(self) -> None:
        sub, big = field_make(3, 1), field_make(3, 2)
        assert big.embed(sub, 0) == 0
        assert big.embed(sub, 1) == 1
        assert big.embed(sub, 2) == big.neg(1)

    def test_embedding_of_quadratic_subfield(self) -> None:
        sub, big = field_make(3, 2), field_make(3, 1, 4)
        for a in sub.elements():
            for b in sub.elements():
                lhs = big.embed(sub, sub.mul(a, b))
                assert lhs == big.mul(big.embed(sub, a), big.embed(sub, b))

    def test_scalar_reduces_mod_p(self) -> None:
        ctx = field_make(5, 2)
        assert ctx.from_int(7) == 2
        assert ctx.scalar(-1, 1) == 4


class TestSolveLinear:
    """Tests for Gaussian elimination over a finite field."""

    def test_unique_solution(self) -> None:
        ctx = field_make(5, 1)
        rows = [np.array([1, 1], dtype=np.int32), np.array([1, 4], dtype=np.int32)]
        values, undetermined, consistent = solve_linear(ctx, rows, [3, 1])
        assert consistent
        assert not undetermined
        # x + y = 3, x - y = 1 over F_5
        assert values == {0: 2, 1: 1}

    def test_partial_determination(self) -> None:
        ctx = field_make(3, 1)
        rows = [
            np.array([1, 0, 0], dtype=np.int32),
            np.array([0, 1, 1], dtype=np.int32),
        ]
        values, undetermined, consistent = solve_linear(ctx, rows, [2, 1])
        assert consistent
        assert values == {0: 2}
        assert undetermined == frozenset({1, 2})

    def test_inconsistent(self) -> None:
        ctx = field_make(3, 1)
        rows = [np.array([1, 1], dtype=np.int32), np.array([2, 2], dtype=np.int32)]
        _, _, consistent = solve_linear(ctx, rows, [1, 1])
        assert not consistent

    def test_empty_system(self) -> None:
        assert solve_linear(field_make(3, 1), [], []) == ({}, frozenset(), True)


# ---------------------------------------------------------------------------
# Witt ring
# ---------------------------------------------------------------------------


class TestWittRing:
    """Tests for O_F / p^K with precision tracking."""

    @pytest.mark.parametrize(("p", "f"), [(3, 1), (3, 2), (5, 2)])
    def test_teichmuller_is_fixed_by_q_power(self, p: int, f: int) -> None:
        ring = witt_make(p, f, 6)
        for a in ring.residue_field.elements():
            t = ring.teichmuller(a)
            assert ring.pow(t, ring.params.q) == t
            assert ring.reduce(t) == a

    def test_teichmuller_of_minus_one(self) -> None:
        ring = witt_make(5, 1, 4)
        assert ring.teichmuller(4).coeffs == (5**4 - 1,)

    @pytest.mark.parametrize(("p", "f"), [(3, 1), (3, 2), (5, 2)])
    def test_inverse(self, p: int, f: int) -> None:
        ring = witt_make(p, f, 5)
        one = ring.from_int(1)
        for a in ring.residue_field.units():
            x = ring.add(ring.from_residue(a), ring.mul_p_power(ring.from_int(2), 1))
            assert ring.mul(x, ring.inv(x)) == one

    def test_precision_is_min_of_operands(self) -> None:
        ring = witt_make(3, 1, 5)
        a = ring.make([4], prec=2)
        b = ring.from_int(7)
        assert ring.add(a, b).prec == 2
        assert ring.mul(a, b).prec == 2

    def test_scaling_by_p_gains_precision(self) -> None:
        ring = witt_make(3, 1, 5)
        a = ring.make([1], prec=2)
        assert ring.scale_int(a, 9).prec == 4
        assert ring.scale_int(a, 0).prec == 5

    def test_divide_by_p(self) -> None:
        ring = witt_make(3, 2, 4)
        a = ring.make([3, 6])
        assert ring.divide_by_p(a) == ring.make([1, 2], prec=3)
        with pytest.raises(PrecisionError, match="non-divisible"):
            ring.divide_by_p(ring.make([1, 3]))

    def test_reduce_requires_a_digit(self) -> None:
        ring = witt_make(3, 1, 3)
        with pytest.raises(PrecisionError):
            ring.reduce(ring.make([1], prec=0))

    def test_units(self) -> None:
        ring = witt_make(3, 2, 3)
        assert ring.is_unit(ring.make([0, 1]))
        assert not ring.is_unit(ring.make([3, 9]))

    def test_agreement_to_common_precision(self) -> None:
        ring = witt_make(3, 1, 4)
        assert ring.agrees(ring.make([1], prec=2), ring.make([10]))
        assert not ring.agrees(ring.make([1]), ring.make([10]))

    def test_rejects_bad_precision(self) -> None:
        with pytest.raises(ValueError, match="K must be at least 1"):
            WittRing(PrimeParams(3, 1), 0)

    def test_make_checks_length(self) -> None:
        with pytest.raises(ValueError, match="expected 2 coefficients"):
            witt_make(3, 2, 2).make([1])


def test_p_valuation() -> None:
    assert p_valuation(54, 3) == 3
    assert p_valuation(-25, 5) == 2
    with pytest.raises(ValueError, match="valuation of zero"):
        p_valuation(0, 3)


@pytest.mark.parametrize(("n", "m"), [(10, 3), (7, 7), (26, 13), (5, 6), (0, 0)])
def test_binomial_mod_p(n: int, m: int) -> None:
    assert binomial_mod_p(n, m, 3) == math.comb(n, m) % 3


def test_binomial_of_negative_top() -> None:
    for m in range(6):
        assert binomial_mod_p(-1, m, 5) == (-1) ** m % 5


# ---------------------------------------------------------------------------
# Series and Laurent polynomials
# ---------------------------------------------------------------------------


class TestTruncSeries:
    """Tests for truncated power series over k."""

    def test_inverse_of_one_minus_t(self) -> None:
        ctx = field_make(3, 1)
        s = TruncSeries.make(ctx, {0: 1, 1: 2}, 6)
        assert s.inverse().coeffs == dict.fromkeys(range(6), 1)

    def test_product_truncation_uses_valuations(self) -> None:
        ctx = field_make(3, 1)
        a = TruncSeries.make(ctx, {2: 1}, 5)
        b = TruncSeries.make(ctx, {0: 1}, 4)
        assert (a * b).trunc == 5

    def test_inverse_requires_constant_term(self) -> None:
        ctx = field_make(3, 1)
        with pytest.raises(ZeroDivisionError):
            TruncSeries.monomial(ctx, 1, 4).inverse()

    def test_reading_beyond_truncation(self) -> None:
        ctx = field_make(3, 1)
        with pytest.raises(PrecisionError):
            _ = TruncSeries.monomial(ctx, 0, 3)[3]

    def test_compose_with_t_plus_t_squared(self) -> None:
        ctx = field_make(5, 1)
        outer = TruncSeries.make(ctx, {1: 1, 2: 1}, 4)
        inner = TruncSeries.make(ctx, {1: 1, 2: 1}, 8)
        composed = series_compose(outer, inner)
        # (t + t^2) + (t + t^2)^2 = t + 2t^2 + 2t^3 + t^4
        assert composed.coeffs == {1: 1, 2: 2, 3: 2}
        assert composed.trunc == 4

    def test_compose_rejects_constant_inner(self) -> None:
        ctx = field_make(3, 1)
        outer = TruncSeries.monomial(ctx, 1, 3)
        with pytest.raises(ValueError, match="zero constant term"):
            series_compose(outer, TruncSeries.monomial(ctx, 0, 3))


class TestLaurentPoly:
    """Tests for exact Laurent polynomials."""

    def test_product_with_negative_degrees(self) -> None:
        ctx = field_make(3, 1)
        a = LaurentPoly.make(ctx, {-1: 1, 1: 1})
        b = LaurentPoly.make(ctx, {-1: 1, 1: 2})
        assert (a * b).coeffs == {-2: 1, 2: 2}

    def test_cancellation_drops_terms(self) -> None:
        ctx = field_make(5, 1)
        a = LaurentPoly.monomial(ctx, 3, 2)
        assert (a - a).is_zero()
        assert (a + a.scale(4)).is_zero()

    def test_json_sorted_numerically(self) -> None:
        ctx = field_make(3, 1)
        poly = LaurentPoly.make(ctx, {10: 1, -2: 2, 3: 1})
        assert list(poly.as_json()) == ["-2", "3", "10"]

    def test_to_series_rejects_negative_support(self) -> None:
        ctx = field_make(3, 1)
        with pytest.raises(ValueError, match="negative support"):
            LaurentPoly.monomial(ctx, -1, 1).to_series(3)
