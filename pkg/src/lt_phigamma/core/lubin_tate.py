"""Multiplication series of the Lubin-Tate formal group ``Phi(t) = pt + t^q``.

For a unit ``gamma`` of ``O_F`` the series ``[gamma](t) = sum a_n t^n`` is the
unique power series with linear term ``gamma`` commuting with ``Phi``. Its
coefficients vanish outside ``1 + xi * Z>=0`` and are determined one index at a
time by comparing coefficients of ``[gamma](Phi(t)) = Phi([gamma](t))``:

    (p^n - p) a_n = [t^n] [gamma](t)^q - sum_m C(m, k) p^(m-k) a_m

where ``m`` runs over smaller indices with ``k = (n - m) / xi <= m``.

Two evaluations of the power term are provided: a blocked linearization used
by :func:`lt_coeffs` and the literal multinomial sum used to cross-check it.

Precision is tracked per coefficient. Values are carried as exact
representatives modulo ``p^K``; the guaranteed precision of ``a_n`` drops by
one exactly when ``a_n`` depends on ``a_m`` through the term with ``m - k = 0``.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from loguru import logger

from lt_phigamma.core.arith import (
    FieldContext,
    PrimeParams,
    TruncSeries,
    WittElem,
    WittRing,
    field_make,
    series_compose,
    witt_make,
)
from lt_phigamma.core.errors import PrecisionError

type Raw = tuple[int, ...]


# ---------------------------------------------------------------------------
# Series container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LTSeries:
    """The coefficients ``a_n`` of ``[gamma](t)`` for ``n <= index_bound``.

    Attributes:
        ring: The truncated ring ``O_F / p^K`` holding the coefficients.
        gamma: The unit whose multiplication series this is.
        coeffs: Coefficients keyed by index; only indices ``1 + j * xi``.
        index_bound: The largest index the series is known to.
    """

    ring: WittRing
    gamma: WittElem
    coeffs: dict[int, WittElem]
    index_bound: int

    def __post_init__(self) -> None:
        xi = self.ring.params.xi
        if any((n - 1) % xi for n in self.coeffs):
            raise ValueError("coefficient outside the index set 1 + xi * Z")

    def coeff(self, n: int) -> WittElem:
        """Return ``a_n``; indices outside ``1 + xi * Z`` give exact zero.

        Raises:
            PrecisionError: If ``n`` exceeds ``index_bound``.
        """
        if n > self.index_bound:
            raise PrecisionError(f"index {n} beyond computed bound {self.index_bound}")
        if n in self.coeffs:
            return self.coeffs[n]
        return self.ring.from_int(0)

    def residue(self, n: int) -> int:
        """Return ``a_n`` reduced into the residue field ``F_q``."""
        return self.ring.reduce(self.coeff(n))

    def mod_p(self) -> TruncSeries:
        """The series reduced modulo ``p``, truncated after ``index_bound``."""
        ctx = field_make(self.ring.params.p, self.ring.params.f)
        reduced = {n: self.ring.reduce(a) for n, a in self.coeffs.items()}
        return TruncSeries.make(ctx, reduced, self.index_bound + 1)

    def indices(self) -> Iterator[int]:
        """Stored indices in increasing order."""
        return iter(sorted(self.coeffs))


def default_precision(q: int, t_bound: int) -> int:
    """Working precision ``ceil(log_q(t_bound)) + 3`` for a series up to ``t_bound``."""
    levels = 0
    reach = 1
    while reach < t_bound:
        reach *= q
        levels += 1
    return levels + 3


# ---------------------------------------------------------------------------
# Power term [s^J] U(s)^q
# ---------------------------------------------------------------------------


def _poly_mul(
    ring: WittRing, a: Sequence[Raw], b: Sequence[Raw], trunc: int
) -> list[Raw]:
    out = [ring.raw_zero() for _ in range(trunc)]
    for i, x in enumerate(a):
        if i >= trunc or not any(x):
            continue
        for j, y in enumerate(b):
            if i + j >= trunc:
                break
            if any(y):
                out[i + j] = ring.raw_add(out[i + j], ring.raw_mul(x, y))
    return out


def _poly_pow(ring: WittRing, a: Sequence[Raw], n: int, trunc: int) -> list[Raw]:
    result: list[Raw] = [ring.raw_int(1)] + [ring.raw_zero() for _ in range(trunc - 1)]
    base = list(a[:trunc])
    while n:
        if n & 1:
            result = _poly_mul(ring, result, base, trunc)
        n >>= 1
        if n:
            base = _poly_mul(ring, base, base, trunc)
    return result


class _BlockedPower:
    """Coefficients of ``U(s)^q`` as the coefficients of ``U`` become known.

    With ``A`` the part of ``U`` of degree at most ``j0``, every coefficient of
    degree ``J <= 2 * j0 + 1`` satisfies

        [s^J] U^q = [s^J] A^q + q * sum_{j0 < i <= J} u_i [s^(J-i)] A^(q-1).

    ``A^q`` and ``A^(q-1)`` are rebuilt when ``J`` leaves that window.
    """

    def __init__(self, ring: WittRing) -> None:
        self._ring = ring
        self._q = ring.params.q
        self._j0 = -1
        self._pow_q: list[Raw] = []
        self._pow_q1: list[Raw] = []

    def coefficient(self, units: Sequence[Raw], J: int) -> Raw:
        if J > 2 * self._j0 + 1:
            self._rebuild(units, J)
        ring = self._ring
        acc = self._pow_q[J]
        for i in range(self._j0 + 1, J + 1):
            term = ring.raw_mul(units[i], self._pow_q1[J - i])
            acc = ring.raw_add(acc, ring.raw_scale(term, self._q))
        return acc

    def _rebuild(self, units: Sequence[Raw], j0: int) -> None:
        trunc = 2 * j0 + 2
        base = list(units[: j0 + 1])
        self._pow_q1 = _poly_pow(self._ring, base, self._q - 1, trunc)
        self._pow_q = _poly_mul(self._ring, self._pow_q1, base, trunc)
        self._j0 = j0
        logger.debug("rebuilt U^q window at j0={} (trunc {})", j0, trunc)


def _partitions(total: int, max_part: int, parts: int) -> Iterator[dict[int, int]]:
    """At most ``parts`` integers in ``[1, max_part]`` summing to ``total``."""
    if total == 0:
        yield {}
        return
    if parts == 0 or max_part == 0:
        return
    for part in range(min(total, max_part), 0, -1):
        for k in range(1, min(parts, total // part) + 1):
            for rest in _partitions(total - k * part, part - 1, parts - k):
                yield {part: k, **rest}


def power_coefficient_multinomial(
    ring: WittRing, units: Sequence[Raw], J: int
) -> Raw:
    """``[s^J] (sum_i units[i] s^i)^q`` by the literal multinomial expansion.

    Each term is ``q! / prod(k_i!) * prod units[i]^(k_i)`` over exponent
    vectors with ``sum k_i = q`` and ``sum i * k_i = J``; ``k_0`` absorbs the
    remaining count.
    """
    q = ring.params.q
    acc = ring.raw_zero()
    for parts in _partitions(J, J, q):
        k0 = q - sum(parts.values())
        coeff = math.factorial(q) // math.factorial(k0)
        term = ring.raw_pow(units[0], k0)
        for i, k in parts.items():
            coeff //= math.factorial(k)
            term = ring.raw_mul(term, ring.raw_pow(units[i], k))
        acc = ring.raw_add(acc, ring.raw_scale(term, coeff))
    return acc


def _lower_terms(ring: WittRing, units: Sequence[Raw], j: int) -> Raw:
    """``sum_m C(m, k) p^(m-k) a_m`` for the index ``n = 1 + j * xi``."""
    params = ring.params
    p, q, xi = params.p, params.q, params.xi
    acc = ring.raw_zero()
    for i in range(-(-(j - 1) // q), j):
        gap = 1 + i * q - j
        if gap >= ring.K:
            break
        m, k = 1 + i * xi, j - i
        acc = ring.raw_add(acc, ring.raw_scale(units[i], math.comb(m, k) * p**gap))
    return acc


# ---------------------------------------------------------------------------
# Recursion
# ---------------------------------------------------------------------------


def lt_coeffs(ring: WittRing, gamma: WittElem, t_bound: int) -> LTSeries:
    """Compute ``[gamma](t)`` up to ``t^t_bound``.

    Args:
        ring: The ring ``O_F / p^K``; ``K`` bounds the attainable precision.
        gamma: A unit of ``ring``.
        t_bound: The largest t-degree to compute.

    Returns:
        The series with ``a_1 = gamma`` and every stored coefficient of
        precision at least 1.

    Raises:
        ValueError: If ``gamma`` is not a unit or ``t_bound < 1``.
        PrecisionError: If some coefficient would end with precision 0.
    """
    if t_bound < 1:
        raise ValueError(f"t_bound must be positive, got {t_bound}")
    if not ring.is_unit(gamma):
        raise ValueError("gamma must be a unit of O_F")
    params = ring.params
    p, q, xi = params.p, params.q, params.xi
    pk = ring.pk
    units: list[Raw] = [gamma.coeffs]
    precs: list[int] = [gamma.prec]
    power = _BlockedPower(ring)
    for j in range(1, (t_bound - 1) // xi + 1):
        n = 1 + j * xi
        prec = precs[j - 1]
        if (j - 1) % q == 0:
            prec = min(prec, precs[(j - 1) // q] - 1)
        if prec < 1:
            raise PrecisionError(
                f"coefficient a_{n} would have precision {prec}; increase K={ring.K}"
            )
        rhs = ring.raw_sub(
            power.coefficient(units, j - 1), _lower_terms(ring, units, j)
        )
        if any(c % p for c in rhs):
            raise PrecisionError(f"a_{n}: right-hand side not divisible by p")
        unit_inv = ring.raw_inv(ring.raw_int(pow(p, n - 1, pk) - 1))
        units.append(ring.raw_mul(tuple(c // p for c in rhs), unit_inv))
        precs.append(prec)
    coeffs = {
        1 + j * xi: WittElem(u, pr)
        for j, (u, pr) in enumerate(zip(units, precs, strict=True))
        if j == 0 or any(u)
    }
    logger.debug(
        "lt_coeffs p={} f={} K={} bound={} min_prec={}",
        p,
        params.f,
        ring.K,
        t_bound,
        min(precs),
    )
    return LTSeries(ring, gamma, coeffs, t_bound)


def lt_coeff_literal(series: LTSeries, n: int) -> WittElem:
    """Recompute ``a_n`` from the lower coefficients by the multinomial formula.

    Raises:
        ValueError: If ``n`` is not an index ``1 + j * xi`` with ``q < n``.
        PrecisionError: Propagated from the division by ``p``.
    """
    ring = series.ring
    params = ring.params
    p, xi = params.p, params.xi
    if (n - 1) % xi or n <= params.q:
        raise ValueError(f"{n} is not an index above q in 1 + xi * Z")
    j = (n - 1) // xi
    lower = [series.coeff(1 + i * xi) for i in range(j)]
    units = [a.coeffs for a in lower]
    rhs = ring.raw_sub(
        power_coefficient_multinomial(ring, units, j - 1), _lower_terms(ring, units, j)
    )
    if any(c % p for c in rhs):
        raise PrecisionError(f"coefficient a_{n}: right-hand side not divisible by p")
    unit_inv = ring.raw_inv(ring.raw_int(pow(p, n - 1, ring.pk) - 1))
    prec = series.coeff(n).prec
    return WittElem(ring.raw_mul(tuple(c // p for c in rhs), unit_inv), prec)


def lt_mod_p(ring: WittRing, gamma: WittElem, t_bound: int) -> TruncSeries:
    """``[gamma](t)`` reduced modulo ``p``, known below ``t_bound + 1``."""
    return lt_coeffs(ring, gamma, t_bound).mod_p()


def lt_series_for(params: PrimeParams, gamma: int, t_bound: int) -> LTSeries:
    """Convenience wrapper embedding an integer ``gamma`` at the default precision."""
    ring = witt_make(params.p, params.f, default_precision(params.q, t_bound))
    return lt_coeffs(ring, ring.from_int(gamma), t_bound)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


class GammaKind(StrEnum):
    """Families of units used to exercise the Gamma-action."""

    RANDOM = "random"
    TEICHMULLER = "teichmuller"
    PRINCIPAL = "principal"


def gamma_sampler(
    ring: WittRing,
    count: int,
    kind: GammaKind = GammaKind.RANDOM,
    rng_seed: int | None = 0,
) -> list[WittElem]:
    """Draw ``count`` units of ``ring`` reproducibly.

    Args:
        ring: The ring to sample from.
        count: Number of units.
        kind: ``RANDOM`` draws arbitrary units, ``TEICHMULLER`` lifts random
            non-zero residues, ``PRINCIPAL`` draws units congruent to 1.
        rng_seed: Seed for ``numpy.random.default_rng``.

    Returns:
        A list of units with full precision.
    """
    rng = np.random.default_rng(rng_seed)
    params = ring.params
    residue_field = ring.residue_field
    out: list[WittElem] = []
    while len(out) < count:
        if kind is GammaKind.TEICHMULLER:
            a = int(rng.integers(1, residue_field.size))
            out.append(ring.teichmuller(a))
            continue
        digits = [int(rng.integers(0, ring.pk)) for _ in range(params.f)]
        if kind is GammaKind.PRINCIPAL:
            digits = [params.p * d for d in digits]
            digits[0] += 1
        candidate = ring.make(digits)
        if ring.is_unit(candidate):
            out.append(candidate)
    return out


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    """Outcome of one coefficient identity for one unit (or pair of units).

    Attributes:
        identity: Short identifier of the identity.
        gamma: Coefficients of the unit(s) involved.
        passed: Whether the identity held to the tracked precision.
    """

    identity: str
    gamma: tuple[int, ...]
    passed: bool


@dataclass(frozen=True)
class IdentityReport:
    """All identity checks for one ``(p, f)``."""

    params: PrimeParams
    checks: tuple[IdentityCheck, ...]

    @property
    def ok(self) -> bool:
        """True when every check passed."""
        return all(c.passed for c in self.checks)

    def failures(self) -> list[IdentityCheck]:
        """The checks that did not pass."""
        return [c for c in self.checks if not c.passed]

    def counts(self) -> dict[str, int]:
        """Number of checks per identity."""
        out: dict[str, int] = {}
        for c in self.checks:
            out[c.identity] = out.get(c.identity, 0) + 1
        return out


def _exceptional_indices(params: PrimeParams) -> dict[int, int]:
    """Indices ``(r p^(f-1) + 1) xi + 1`` keyed to ``r`` for ``0 < r < p``."""
    p, f, xi = params.p, params.f, params.xi
    return {(r * p ** (f - 1) + 1) * xi + 1: r for r in range(1, p)}


def _check_series(series: LTSeries, literal_bound: int) -> list[IdentityCheck]:
    ring = series.ring
    params = ring.params
    p, f, q, xi = params.p, params.f, params.q, params.xi
    k = ring.residue_field
    gamma = series.gamma
    key = gamma.coeffs
    checks: list[IdentityCheck] = []

    a1, aq = series.coeff(1), series.coeff(q)
    checks.append(IdentityCheck("linear-term", key, a1 == gamma))

    lhs = ring.scale_int(aq, p**q - p)
    rhs = ring.sub(ring.pow(gamma, q), gamma)
    checks.append(IdentityCheck("degree-q-term", key, ring.agrees(lhs, rhs)))

    a2 = series.coeff(2 * q - 1)
    lhs = ring.scale_int(a2, p - p ** (2 * q - 1))
    diff = ring.sub(ring.from_int(p**xi), ring.pow(gamma, xi))
    rhs = ring.scale_int(ring.mul(diff, aq), q)
    checks.append(IdentityCheck("degree-2q-1-term", key, ring.agrees(lhs, rhs)))

    for n in range(q + xi, min(literal_bound, series.index_bound) + 1, xi):
        literal = lt_coeff_literal(series, n)
        checks.append(
            IdentityCheck(
                f"literal-recursion-{n}", key, ring.agrees(literal, series.coeff(n))
            )
        )

    if f >= 2:
        exceptional = _exceptional_indices(params)
        r1, rq = ring.reduce(a1), ring.reduce(aq)
        ratio = k.div(rq, r1)
        support_ok = True
        for n in range(q + xi, q * q, xi):
            got = series.residue(n)
            if n in exceptional:
                r = exceptional[n]
                expected = k.neg(
                    k.scalar(
                        math.comb(p, r) // p,
                        k.mul(r1, k.pow(ratio, r * p ** (f - 1))),
                    )
                )
                support_ok = support_ok and got == expected
            else:
                support_ok = support_ok and got == 0
        checks.append(IdentityCheck("mod-p-support", key, support_ok))

    if ring.reduce(gamma) == 1:
        checks.append(
            IdentityCheck("principal-unit-expansion", key, _principal_ok(series))
        )
    return checks


def _principal_ok(series: LTSeries) -> bool:
    """For ``gamma = 1 mod p`` compare ``[gamma]`` with its two-term expansion."""
    params = series.ring.params
    p, f, q, xi = params.p, params.f, params.q, params.xi
    k: FieldContext = series.ring.residue_field
    aq = series.residue(q)
    bound = (2 * p ** (f - 1) + 1) * xi + 1
    expected = {1: 1, q: aq}
    corner = (p ** (f - 1) + 1) * xi + 1
    expected[corner] = k.add(expected.get(corner, 0), k.neg(k.pow(aq, p ** (f - 1))))
    return all(
        series.residue(n) == expected.get(n, 0) for n in range(1, bound, xi)
    )


def lt_verify_identities(
    ring: WittRing, gammas: Sequence[WittElem], literal_bound: int | None = None
) -> IdentityReport:
    """Check every coefficient identity of ``[gamma]`` for the sampled units.

    Coefficients are computed up to ``2 q^2``. Consecutive units form the
    pairs for the cocycle identity. The mod-p support identity applies only
    for ``f >= 2``; the principal-unit expansion only for ``gamma = 1 mod p``.

    Args:
        ring: The ring ``O_F / p^K``.
        gammas: Units of ``ring``.
        literal_bound: Largest index recomputed by the multinomial formula
            (default ``4 q``).

    Returns:
        The report of all checks.

    Raises:
        PrecisionError: If ``K`` is too small for ``2 q^2``.
    """
    params = ring.params
    q = params.q
    bound = 2 * q * q
    lit = 4 * q if literal_bound is None else literal_bound
    k = ring.residue_field
    series = {g.coeffs: lt_coeffs(ring, g, bound) for g in gammas}
    checks: list[IdentityCheck] = []
    for g in gammas:
        checks.extend(_check_series(series[g.coeffs], lit))
    for g, h in zip(gammas, gammas[1:], strict=False):
        gh = ring.mul(g, h)
        s_g, s_h = series[g.coeffs], series[h.coeffs]
        s_gh = lt_coeffs(ring, gh, q)
        lhs = k.div(s_gh.residue(q), s_gh.residue(1))
        rhs = k.add(
            k.div(s_g.residue(q), s_g.residue(1)),
            k.div(s_h.residue(q), s_h.residue(1)),
        )
        checks.append(IdentityCheck("cocycle", g.coeffs + h.coeffs, lhs == rhs))
    logger.debug("identity checks p={} f={}: {}", params.p, params.f, len(checks))
    return IdentityReport(params, tuple(checks))


def composition_law_holds(
    ring: WittRing, gamma: WittElem, gamma_prime: WittElem, t_bound: int
) -> bool:
    """Check ``[gamma gamma'] = [gamma] o [gamma']`` mod ``p`` up to ``t_bound``."""
    product = lt_mod_p(ring, ring.mul(gamma, gamma_prime), t_bound)
    composed = series_compose(
        lt_mod_p(ring, gamma, t_bound), lt_mod_p(ring, gamma_prime, t_bound)
    )
    trunc = min(product.trunc, composed.trunc)
    return product.truncate(trunc) == composed.truncate(trunc)


def frobenius_equivariance_holds(series: TruncSeries, q: int) -> bool:
    """Check ``[gamma](t^q) = [gamma](t)^q`` modulo ``p`` on the common window."""
    lhs = series.substitute_power(q)
    rhs = series.pow(q)
    trunc = min(lhs.trunc, rhs.trunc)
    return lhs.truncate(trunc) == rhs.truncate(trunc)
