"""Tests for digit combinatorics on F = Z/fZ."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.combinat import (
    DigitType,
    FSubset,
    de_split,
    delta,
    delta_lift,
    digit_type,
    digits_of,
    e_set_from_anti_digits,
    ell_at,
    ell_from_anti_digits,
    i_d,
    i_d_closed,
    i_d_closed_lift,
    i_d_lift,
    interval_image,
    interval_left,
    interval_right,
    is_maximal,
    m_d,
    mu,
    mu_start_choices,
    nu_map,
    sigma,
    signed_sum,
)

P31 = PrimeParams(3, 1)
P32 = PrimeParams(3, 2)

SMALL_PARAMS = [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2)]


@st.composite
def exponents(draw: st.DrawFn) -> tuple[PrimeParams, int]:
    """A prime datum with an exponent in ``[0, q - 2]``."""
    p, f = draw(st.sampled_from(SMALL_PARAMS))
    params = PrimeParams(p, f)
    return params, draw(st.integers(0, params.q - 2))


@st.composite
def subsets(draw: st.DrawFn, f: int = 3) -> FSubset:
    return FSubset(f, draw(st.integers(0, (1 << f) - 1)))


def _params_grid() -> list[PrimeParams]:
    return [PrimeParams(p, f) for p, f in SMALL_PARAMS]


# ---------------------------------------------------------------------------
# FSubset
# ---------------------------------------------------------------------------


class TestFSubset:
    """Tests for subsets of F stored as masks."""

    def test_membership_reduces_mod_f(self) -> None:
        s = FSubset.of(2, [1])
        assert 3 in s
        assert -1 in s
        assert 0 not in s

    def test_interval_wraps(self) -> None:
        assert FSubset.interval(3, 2, 3).members == (0, 2)
        assert FSubset.interval(3, 2, 4).is_full()
        assert FSubset.interval(3, 2, 1).is_empty()

    def test_runs_of_wrapping_set(self) -> None:
        J = FSubset.of(3, [2, 0])
        assert J.jminus.members == (2,)
        assert J.runs() == [(2, 4)]

    def test_plus_minus_views(self) -> None:
        J = FSubset.of(3, [0])
        assert J.jminus.members == (0,)
        assert J.jplus.members == (1,)
        assert J.jc1.members == (0, 2)

    def test_full_set_has_no_runs(self) -> None:
        full = FSubset.full(2)
        assert full.jminus.is_empty()
        assert full.runs() == []

    def test_run_end_rejects_non_start(self) -> None:
        with pytest.raises(ValueError, match="does not start a run"):
            FSubset.of(3, [0, 1]).run_end(1)

    def test_invalid_mask(self) -> None:
        with pytest.raises(ValueError, match="out of range"):
            FSubset(2, 4)

    def test_invalid_f(self) -> None:
        with pytest.raises(ValueError, match="f must lie"):
            FSubset(0, 0)

    def test_is_frozen(self) -> None:
        s = FSubset.empty(2)
        with pytest.raises(AttributeError):
            s.mask = 1  # type: ignore[misc]

    def test_all_subsets_count(self) -> None:
        assert len(list(FSubset.all_subsets(3))) == 8

    @given(J=subsets())
    def test_complement_partitions(self, J: FSubset) -> None:
        assert (J | J.jc).is_full()
        assert (J & J.jc).is_empty()
        assert J.jc.jc == J

    @given(J=subsets())
    def test_runs_cover_set(self, J: FSubset) -> None:
        """The runs starting at J^- tile J exactly."""
        covered: list[int] = []
        for start, end in J.runs():
            covered.extend(x % 3 for x in range(start, end))
        if J.is_full():
            assert covered == []
        else:
            assert sorted(covered) == list(J.members)

    @given(J=subsets(), k=st.integers(-5, 5))
    def test_shift_preserves_size(self, J: FSubset, k: int) -> None:
        assert len(J.shift(k)) == len(J)


# ---------------------------------------------------------------------------
# Digits
# ---------------------------------------------------------------------------


class TestDigits:
    """Tests for standard digits and anti-digits."""

    def test_known_values(self) -> None:
        d = digits_of(P32, 6)
        assert d.m == (0, 2)
        assert d.a == (1, 3)

    def test_zero_has_all_top_minus_one(self) -> None:
        assert digits_of(P32, 0).a == (2, 2)

    def test_cyclotomic_has_all_ones(self) -> None:
        assert digits_of(P32, 4).a == (1, 1)
        assert digits_of(PrimeParams(5, 2), 18).a == (1, 1)

    def test_periodic_access(self) -> None:
        d = digits_of(P32, 6)
        assert d.m_at(3) == 2
        assert d.a_at(-2) == 1

    def test_out_of_range(self) -> None:
        with pytest.raises(ValueError, match="ell must lie"):
            digits_of(P32, 8)

    def test_ell_at_known_value(self) -> None:
        assert ell_at(P32, 6, 0) == 6
        assert ell_at(P32, 6, 1) == 6
        assert ell_at(P32, 5, 1) == 21

    def test_ell_at_negative_index(self) -> None:
        with pytest.raises(ValueError, match="non-negative"):
            ell_at(P32, 1, -1)

    def test_signed_sum(self) -> None:
        assert signed_sum(P32, (1, 3), FSubset.of(2, [0])) == -8
        assert signed_sum(P32, (1, 3), FSubset.full(2)) == 10

    @given(data=exponents())
    @settings(max_examples=60)
    def test_anti_digits_round_trip(self, data: tuple[PrimeParams, int]) -> None:
        params, ell = data
        a = digits_of(params, ell).a
        assert all(1 <= x <= params.p for x in a)
        assert any(x != params.p for x in a)
        assert ell_from_anti_digits(params, a) == ell

    @pytest.mark.parametrize("params", _params_grid(), ids=str)
    def test_anti_digit_map_is_bijective(self, params: PrimeParams) -> None:
        images = {digits_of(params, ell).a for ell in range(params.q - 1)}
        assert len(images) == params.q - 1

    @pytest.mark.parametrize("params", _params_grid(), ids=str)
    def test_anti_digits_from_sigma(self, params: PrimeParams) -> None:
        """``a_i = sigma(i + 1) p - sigma(i) - m_i`` for every exponent."""
        p = params.p
        for ell in range(params.q - 1):
            d = digits_of(params, ell)
            for i in range(params.f):
                expected = sigma(params, ell, i + 1) * p - sigma(params, ell, i)
                assert d.a[i] == expected - d.m[i]

    @pytest.mark.parametrize("params", _params_grid(), ids=str)
    def test_window_identity(self, params: PrimeParams) -> None:
        """``ell_[i] - sigma(i) p^i xi = -sum_{j=i}^{i+f-1} a_j p^j``."""
        p, f, xi = params.p, params.f, params.xi
        for ell in range(params.q - 1):
            d = digits_of(params, ell)
            for i in range(2 * f):
                window = sum(d.a_at(j) * p**j for j in range(i, i + f))
                lhs = ell_at(params, ell, i) - sigma(params, ell, i) * p**i * xi
                assert lhs == -window


class TestDigitType:
    """Tests for the f = 2 shape classification."""

    @pytest.mark.parametrize(
        ("ell", "expected"),
        [(1, DigitType.A), (4, DigitType.A), (6, DigitType.B), (2, DigitType.C)],
    )
    def test_known_types(self, ell: int, expected: DigitType) -> None:
        assert digit_type(P32, ell) is expected

    def test_zero_rejected(self) -> None:
        with pytest.raises(ValueError, match="no digit type"):
            digit_type(P32, 0)

    def test_only_f_two(self) -> None:
        with pytest.raises(ValueError, match="f = 2 only"):
            digit_type(P31, 1)


# ---------------------------------------------------------------------------
# D, E, sigma
# ---------------------------------------------------------------------------


class TestDESplit:
    """Tests for the split F = D(ell) + E(ell)."""

    def test_zero_is_generic(self) -> None:
        D, E = de_split(P32, 0)
        assert D.is_full()
        assert E.is_empty()

    def test_type_b(self) -> None:
        D, E = de_split(P32, 6)
        assert D.members == (1,)
        assert E.members == (0,)
        assert [sigma(P32, 6, j) for j in range(4)] == [2, 1, 2, 1]

    def test_type_c(self) -> None:
        D, E = de_split(P32, 2)
        assert D.members == (0,)
        assert E.members == (1,)
        assert [sigma(P32, 2, j) for j in range(4)] == [1, 2, 1, 2]

    def test_type_c_with_trailing_p_minus_two(self) -> None:
        """With ``m = (p - 1, p - 2)`` the scan runs through both digits."""
        D, E = de_split(P32, 5)
        assert D.is_empty()
        assert E.is_full()

    def test_type_a_is_generic(self) -> None:
        for ell in (1, 3, 4):
            assert de_split(P32, ell)[0].is_full()

    def test_f_one_is_always_generic(self) -> None:
        for ell in range(P31.q - 1):
            assert de_split(P31, ell)[1].is_empty()

    @pytest.mark.parametrize("params", _params_grid(), ids=str)
    def test_anti_digit_reading_agrees(self, params: PrimeParams) -> None:
        for ell in range(params.q - 1):
            assert e_set_from_anti_digits(params, ell) == de_split(params, ell)[1]


# ---------------------------------------------------------------------------
# i_D
# ---------------------------------------------------------------------------


class TestIndexD:
    """Tests for i_D, m_D and the closed form."""

    def test_type_b_constant_one(self) -> None:
        assert [i_d(P32, 6, x) for x in range(4)] == [1, 1, 1, 1]

    def test_type_c_constant_zero(self) -> None:
        assert [i_d(P32, 2, x) for x in range(4)] == [0, 0, 0, 0]

    def test_type_a_identity(self) -> None:
        assert [i_d(P32, 1, x) for x in range(4)] == [0, 1, 0, 1]

    def test_integer_companion(self) -> None:
        # i_D(2) + m_D(2) * 2 = 1 for ell = 6: walk one step down from 2.
        assert i_d_lift(P32, 6, 2) == 1
        assert m_d(P32, 6, 2) == 0

    @pytest.mark.parametrize("params", _params_grid(), ids=str)
    def test_closed_form_agrees(self, params: PrimeParams) -> None:
        f = params.f
        for ell in range(params.q - 1):
            for i in range(-f, 3 * f):
                assert i_d_lift(params, ell, i) == i_d_closed_lift(params, ell, i)
                assert i_d(params, ell, i) == i_d_closed(params, ell, i)

    @given(data=exponents(), i=st.integers(0, 8))
    def test_lift_range(self, data: tuple[PrimeParams, int], i: int) -> None:
        params, ell = data
        assert i - params.f <= i_d_lift(params, ell, i) <= i


# ---------------------------------------------------------------------------
# nu, delta, mu
# ---------------------------------------------------------------------------


class TestNu:
    """Tests for the re-indexing map nu."""

    def test_generic_source_follows_target(self) -> None:
        assert nu_map(P32, 1, 6) == (1, 1)
        assert nu_map(P32, 1, 2) == (0, 0)
        assert nu_map(P32, 1, 1) == (0, 1)

    def test_exceptional_points_fixed(self) -> None:
        # E(6) = {0}, so 0 is fixed whatever the target.
        for ell_bar in range(P32.q - 1):
            assert nu_map(P32, 6, ell_bar)[0] == 0
        assert nu_map(P32, 6, 2) == (0, 0)


class TestDeltaMu:
    """Tests for delta and the re-indexed set mu."""

    def test_delta_known_values(self) -> None:
        assert delta(P32, 6, 0) == 0
        assert delta(P32, 6, 1) == 0

    @given(data=exponents(), j=st.integers(0, 6))
    def test_delta_lift_range(self, data: tuple[PrimeParams, int], j: int) -> None:
        params, ell = data
        assert j - params.f <= delta_lift(params, ell, j) <= j

    def test_mu_moves_into_delta_image(self) -> None:
        jc = FSubset.of(2, [1])
        assert mu_start_choices(P32, 6, jc) == [0]
        assert mu(P32, 6, jc).members == (0,)

    def test_mu_fixes_closed_sets(self) -> None:
        jc = FSubset.of(2, [0])
        assert mu_start_choices(P32, 6, jc) == []
        assert mu(P32, 6, jc) == jc

    def test_mu_rejects_bad_start(self) -> None:
        with pytest.raises(ValueError, match="not in delta"):
            mu(P32, 6, FSubset.of(2, [1]), start=1)

    @given(J=subsets())
    def test_mu_identity_for_generic_target(self, J: FSubset) -> None:
        # ell = 1 at (3, 3) has no exceptional digit, so delta is the identity.
        assert mu(PrimeParams(3, 3), 1, J) == J

    @pytest.mark.parametrize("params", _params_grid(), ids=str)
    def test_mu_preserves_size(self, params: PrimeParams) -> None:
        for ell in range(params.q - 1):
            for jc in FSubset.all_subsets(params.f):
                assert len(mu(params, ell, jc)) == len(jc)


class TestMaximality:
    """Tests for maximal complements."""

    def test_blocking_window(self) -> None:
        # a(6) = (1, 3): the window (a_1, a_2) = (p, 1) blocks J = {1}.
        assert not is_maximal(P32, 6, FSubset.of(2, [0]))
        assert is_maximal(P32, 6, FSubset.of(2, [1]))
        assert is_maximal(P32, 6, FSubset.empty(2))

    def test_all_top_minus_one_excludes_full_set(self) -> None:
        assert not is_maximal(P32, 0, FSubset.empty(2))
        assert is_maximal(P32, 0, FSubset.of(2, [0]))


class TestIntervalMaps:
    """Tests for the interval images under nu."""

    def test_identity_interval(self) -> None:
        assert interval_image(P32, 1, 1, 0, 2) == (0, 1)
        assert interval_image(P32, 1, 1, 1, 1) is None

    def test_left_part_contains_zero(self) -> None:
        assert interval_left(P32, 1, 1, 0, 2).is_full()
        assert interval_right(P32, 1, 1, 0, 2).is_empty()

    @given(
        data=exponents(),
        ell2=st.integers(0, 7),
        a=st.integers(0, 5),
        width=st.integers(0, 4),
    )
    def test_left_and_right_split(
        self, data: tuple[PrimeParams, int], ell2: int, a: int, width: int
    ) -> None:
        params, ell1 = data
        ell2 %= params.q - 1
        left = interval_left(params, ell1, ell2, a, a + width)
        right = interval_right(params, ell1, ell2, a, a + width)
        assert (left & right).is_empty()
        bounds = interval_image(params, ell1, ell2, a, a + width)
        if bounds is None:
            assert (left | right).is_empty()
        else:
            assert left | right == FSubset.interval(params.f, *bounds)
