"""Exponent bookkeeping for the reducible rank-two presentations.

For ``0 < ell < q - 1`` and an auxiliary ``N`` the defining relation of a
reducible presentation carries the exponents

* ``r = q^N - 1 - p^(f-1) xi / (p - 1)``,
* ``o_i = q^N - 1 - p^i (xi + q xi / (p - 1))`` for ``0 <= i < f``,
* ``r_i = q^N - 1 + ell_[i] - p^i xi`` for ``i`` in ``D``,
* ``n_i^(0) = q^N - 1 + q^2 ell_[i] - 2 p^(2f+i) xi`` and
  ``n_i^(j) = n_i^(0) + p^i g^(j)`` for ``i`` in ``E`` and ``1 <= j <= f``,

together with the polynomials ``H(m, i) = 1 - (m + 2) sum_j t^(p^i g^(j))``.
``D`` and ``E`` default to ``D(ell)`` and ``E(ell)`` but may be any finite sets
of non-negative integers. Every exponent minus ``q^N - 1`` is independent of
``N``; those shifted values are what the phi-matrix sees.

The ``check_*`` functions re-derive the binomial and congruence identities the
construction depends on and return them as an :class:`ExponentReport`.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from functools import lru_cache

from loguru import logger

from lt_phigamma.core.arith import (
    FieldContext,
    LaurentPoly,
    PrimeParams,
    binomial_mod_p,
    p_valuation,
)
from lt_phigamma.core.combinat import de_split, digits_of, ell_at, sigma

# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------


def g_exponent(params: PrimeParams, j: int) -> int:
    """``g^(j) = xi (sum_{s<j} p^(2f+s+1-j) - p^(f+1-j))`` for ``1 <= j <= f``.

    Raises:
        ValueError: If ``j`` is outside ``[1, f]``.
    """
    p, f, xi = params.p, params.f, params.xi
    if not 1 <= j <= f:
        raise ValueError(f"j must lie in [1, {f}], got {j}")
    return xi * (sum(p ** (2 * f + s + 1 - j) for s in range(j)) - p ** (f + 1 - j))


def h_poly(params: PrimeParams, ctx: FieldContext, m: int, i: int) -> LaurentPoly:
    """``H(m, i) = 1 - (m + 2) sum_{j=1}^{f} t^(p^i g^(j))`` over ``ctx``."""
    coeff = ctx.neg(ctx.from_int(m + 2))
    out = LaurentPoly.monomial(ctx, 0, 1)
    for j in range(1, params.f + 1):
        degree = params.p**i * g_exponent(params, j)
        out = out + LaurentPoly.monomial(ctx, degree, coeff)
    return out


def cyclotomic_point(params: PrimeParams) -> int:
    """``(p - 2) xi / (p - 1)``, the only ``ell`` admitting a non-zero ``c``."""
    return (params.p - 2) * params.xi // (params.p - 1)


def _r_shift(params: PrimeParams) -> int:
    return -(params.p ** (params.f - 1)) * params.xi // (params.p - 1)


def _o_shift(params: PrimeParams, i: int) -> int:
    p, q, xi = params.p, params.q, params.xi
    return -(p**i) * (xi + q * xi // (p - 1))


def _d_shift(params: PrimeParams, ell: int, i: int) -> int:
    return ell_at(params, ell, i) - params.p**i * params.xi


def _e_shifts(params: PrimeParams, ell: int, i: int) -> tuple[int, ...]:
    p, f, q, xi = params.p, params.f, params.q, params.xi
    base = q * q * ell_at(params, ell, i) - 2 * p ** (2 * f + i) * xi
    return (base, *(base + p**i * g_exponent(params, j) for j in range(1, f + 1)))


# ---------------------------------------------------------------------------
# The exponent system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentSystem:
    """All exponents of one reducible presentation.

    Attributes:
        params: The prime data.
        ell: The exponent ``ell`` in ``(0, q - 1)``.
        N: The auxiliary Frobenius power.
        d_set: Indices carrying ``r_i``.
        e_set: Indices carrying ``n_i^(j)``.
        r: The exponent ``r``.
        o: ``o_0, ..., o_{f-1}``.
        r_d: ``r_i`` by index.
        n_e: ``(n_i^(0), ..., n_i^(f))`` by index.
    """

    params: PrimeParams
    ell: int
    N: int
    d_set: tuple[int, ...]
    e_set: tuple[int, ...]
    r: int
    o: tuple[int, ...]
    r_d: dict[int, int]
    n_e: dict[int, tuple[int, ...]]

    @property
    def base(self) -> int:
        """``q^N - 1``."""
        return self.params.q**self.N - 1

    def shifted(self, exponent: int) -> int:
        """``exponent + 1 - q^N``, the ``N``-free Laurent exponent."""
        return exponent - self.base

    def all_exponents(self) -> list[int]:
        """Every exponent of the system, unsorted."""
        out = [self.r, *self.o, *self.r_d.values()]
        for ns in self.n_e.values():
            out.extend(ns)
        return out


def _as_indices(
    values: Iterable[int] | None, default: Iterable[int]
) -> tuple[int, ...]:
    chosen = tuple(sorted(set(default if values is None else values)))
    if any(i < 0 for i in chosen):
        raise ValueError(f"indices must be non-negative, got {chosen}")
    return chosen


def _shifts(
    params: PrimeParams, ell: int, d_set: tuple[int, ...], e_set: tuple[int, ...]
) -> list[int]:
    out = [_r_shift(params), *(_o_shift(params, i) for i in range(params.f))]
    out.extend(_d_shift(params, ell, i) for i in d_set)
    for i in e_set:
        out.extend(_e_shifts(params, ell, i))
    return out


def minimal_n(
    params: PrimeParams, ell: int, d_set: Iterable[int], e_set: Iterable[int]
) -> int:
    """Least ``N >= 1`` making every exponent non-negative."""
    lowest = min(_shifts(params, ell, tuple(d_set), tuple(e_set)))
    N = 1
    while params.q**N - 1 + lowest < 0:
        N += 1
    return N


@lru_cache(maxsize=1024)
def _exponents_cached(
    params: PrimeParams,
    ell: int,
    N: int | None,
    d_set: tuple[int, ...],
    e_set: tuple[int, ...],
) -> ExponentSystem:
    n_min = minimal_n(params, ell, d_set, e_set)
    if N is None:
        N = n_min
    elif N < n_min:
        raise ValueError(f"N={N} leaves negative exponents; need N >= {n_min}")
    base = params.q**N - 1
    system = ExponentSystem(
        params=params,
        ell=ell,
        N=N,
        d_set=d_set,
        e_set=e_set,
        r=base + _r_shift(params),
        o=tuple(base + _o_shift(params, i) for i in range(params.f)),
        r_d={i: base + _d_shift(params, ell, i) for i in d_set},
        n_e={i: tuple(base + s for s in _e_shifts(params, ell, i)) for i in e_set},
    )
    logger.debug("exponents ell={} N={} D={} E={}", ell, N, d_set, e_set)
    return system


def exponents(
    params: PrimeParams,
    ell: int,
    N: int | None = None,
    d_set: Iterable[int] | None = None,
    e_set: Iterable[int] | None = None,
) -> ExponentSystem:
    """Build the exponent system of ``ell``.

    Args:
        params: The prime data.
        ell: An exponent with ``0 < ell < q - 1``.
        N: The auxiliary power; the least admissible value when omitted.
        d_set: Indices for ``r_i`` (default ``D(ell)``).
        e_set: Indices for ``n_i^(j)`` (default ``E(ell)``).

    Returns:
        The cached :class:`ExponentSystem`.

    Raises:
        ValueError: If ``ell`` is out of range, an index is negative or ``N``
            is too small.
    """
    if not 0 < ell < params.xi:
        raise ValueError(f"ell must lie in (0, {params.xi}), got {ell}")
    D, E = de_split(params, ell)
    return _exponents_cached(
        params, ell, N, _as_indices(d_set, D.members), _as_indices(e_set, E.members)
    )


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentCheck:
    """Outcome of one identity for one ``ell`` and index.

    Attributes:
        identity: Short identifier of the identity.
        ell: The exponent checked.
        index: The index ``i`` (or a pair code) the identity refers to.
        passed: Whether it held.
    """

    identity: str
    ell: int
    index: int
    passed: bool


@dataclass(frozen=True)
class ExponentReport:
    """All exponent checks for one ``(p, f)``."""

    params: PrimeParams
    checks: tuple[ExponentCheck, ...]

    @property
    def ok(self) -> bool:
        """True when every check passed."""
        return all(c.passed for c in self.checks)

    def failures(self) -> list[ExponentCheck]:
        """The checks that did not pass."""
        return [c for c in self.checks if not c.passed]

    def counts(self) -> dict[str, int]:
        """Number of checks per identity."""
        out: dict[str, int] = {}
        for c in self.checks:
            out[c.identity] = out.get(c.identity, 0) + 1
        return out

    def as_json(self) -> dict[str, object]:
        return {
            "checked": len(self.checks),
            "counts": self.counts(),
            "counterexamples": [
                {"identity": c.identity, "ell": c.ell, "index": c.index}
                for c in self.failures()
            ],
        }


def _binomials_isolated(n: int, peak: int, value: int, top: int, p: int) -> bool:
    """``C(n, peak) = value`` and ``C(n, m) = 0`` for other ``m`` in ``[1, top]``."""
    for m in range(1, top + 1):
        expected = value % p if m == peak else 0
        if binomial_mod_p(n, m, p) != expected:
            return False
    return True


def check_binomials(system: ExponentSystem) -> list[ExponentCheck]:
    """The mod-``p`` binomial congruences of ``r``, ``o_i``, ``r_i`` and ``n_i^(j)``."""
    params, ell = system.params, system.ell
    p, f = params.p, params.f
    digits = digits_of(params, ell)
    checks = [
        ExponentCheck(
            "r-binomials",
            ell,
            0,
            _binomials_isolated(system.r + 1, 0, 0, p ** (f - 1) - 1, p),
        )
    ]
    for i, o_i in enumerate(system.o):
        ok = _binomials_isolated(o_i + 1, p**i, 1, p**i * params.q - 1, p)
        checks.append(ExponentCheck("o-binomials", ell, i, ok))
    for i, r_i in system.r_d.items():
        ok = _binomials_isolated(r_i + 1, 0, 0, p**i - 1, p)
        checks.append(ExponentCheck("r_i-binomials", ell, i, ok))
    for i, ns in system.n_e.items():
        peak = p ** (i + 2 * f)
        ok = _binomials_isolated(ns[0] + 1, peak, digits.m_at(i) + 2, 2 * peak - 1, p)
        for j in range(1, f + 1):
            ok = ok and _binomials_isolated(
                ns[j] + 1, p ** (i + 1 - j + f), 1, p ** (i + 1 - j + 2 * f) - 1, p
            )
        checks.append(ExponentCheck("n-binomials", ell, i, ok))
    return checks


def check_structure(system: ExponentSystem) -> list[ExponentCheck]:
    """Monotonicity, the gap and step identities and the mod-``xi`` congruences."""
    params, ell = system.params, system.ell
    p, f, q, xi = params.p, params.f, params.q, params.xi
    checks: list[ExponentCheck] = []
    for i, ns in system.n_e.items():
        increasing = all(a < b for a, b in zip(ns, ns[1:], strict=False))
        checks.append(ExponentCheck("n-increasing", ell, i, increasing))
        checks.append(
            ExponentCheck("n-first-gap", ell, i, ns[1] - ns[0] == q * p**i * xi * xi)
        )
        step = all(
            ns[j] + p ** (i + 1 - j + f) * xi * (p ** (f - 1) + 1)
            == ns[j + 1] + p ** (i - j + f) * xi
            for j in range(1, f)
        )
        checks.append(ExponentCheck("n-step", ell, i, step))
        congruent = all((n - ell) % xi == 0 for n in ns)
        checks.append(ExponentCheck("n-congruence", ell, i, congruent))
    for i, r_i in system.r_d.items():
        checks.append(ExponentCheck("r_i-congruence", ell, i, (r_i - ell) % xi == 0))
    if ell == cyclotomic_point(params):
        ok = (system.r - ell) % xi == 0 and all((o - ell) % xi == 0 for o in system.o)
        checks.append(ExponentCheck("r-o-congruence", ell, 0, ok))
    return checks


def e_lower_bound_holds(params: PrimeParams, ell: int, i: int) -> bool:
    """``ell_[i] >= p^i (q - sum_{s<f} p^s)`` for ``i`` in ``E(ell)``."""
    p, q = params.p, params.q
    return ell_at(params, ell, i) >= p**i * (q - (q - 1) // (p - 1))


def check_lower_bounds(params: PrimeParams, ell: int) -> list[ExponentCheck]:
    """The lower bound on ``ell_[i]`` over ``E(ell)``."""
    return [
        ExponentCheck("e-lower-bound", ell, i, e_lower_bound_holds(params, ell, i))
        for i in de_split(params, ell)[1]
    ]


def separating_values(params: PrimeParams, ell: int) -> dict[str, int]:
    """``N``-free values whose valuations and distinctness separate classes.

    Keys are ``"r{i}"`` for ``i`` in ``D' = {i : m_i != p - 1}``, ``"m{i},{j}"``
    for ``i`` in ``E' = {i in E(ell) : m_i != p - 2}`` and ``0 <= j <= f``, and
    ``"o{i}"`` when ``ell`` is the cyclotomic point. Each value is the
    exponent plus ``1 - q^N``.
    """
    p, f, q, xi = params.p, params.f, params.q, params.xi
    digits = digits_of(params, ell)
    E = de_split(params, ell)[1]
    out: dict[str, int] = {}
    for i in range(f):
        if digits.m_at(i) != p - 1:
            out[f"r{i}"] = _d_shift(params, ell, i)
    for i in E:
        if digits.m_at(i) == p - 2:
            continue
        ell_i = ell_at(params, ell, i)
        out[f"m{i},0"] = ell_i - 2 * p**i * xi
        for j in range(1, f + 1):
            wrap = 0 if i + 1 >= j else f
            p_ij = p ** (i + 1 - j + wrap)
            tail = p ** (j - 1) * q + 1 - sum(p**s * q for s in range(j - 1))
            out[f"m{i},{j}"] = q * ell_i * p**wrap - p_ij * xi * tail
    if ell == cyclotomic_point(params):
        for i in range(f):
            out[f"o{i}"] = _o_shift(params, i)
    return out


def _expected_valuation(params: PrimeParams, key: str) -> int:
    if key[0] in "ro":
        return int(key[1:])
    i, j = (int(x) for x in key[1:].split(","))
    if j == 0:
        return i
    return i + 1 - j + (0 if i + 1 >= j else params.f)


def check_separation(params: PrimeParams, ell: int) -> list[ExponentCheck]:
    """Valuations, pairwise distinctness and non-divisibility by ``q``."""
    values = separating_values(params, ell)
    p, q = params.p, params.q
    checks: list[ExponentCheck] = []
    for key, value in values.items():
        ok = value != 0 and p_valuation(value, p) == _expected_valuation(params, key)
        index = int(key[1:].split(",")[0])
        checks.append(ExponentCheck(f"valuation-{key[0]}", ell, index, ok))
        if key[0] != "o":
            coprime = value % q != 0
            checks.append(ExponentCheck("not-divisible-by-q", ell, index, coprime))
    distinct = len(set(values.values())) == len(values)
    checks.append(ExponentCheck("distinct", ell, 0, distinct))
    return checks


def window_value(params: PrimeParams, ell: int, j: int) -> int:
    """``sigma(j) xi p^j - ell_[j]``."""
    return sigma(params, ell, j) * params.xi * params.p**j - ell_at(params, ell, j)


def check_windows(
    params: PrimeParams, ell: int, span: int | None = None
) -> list[ExponentCheck]:
    """Growth of ``sigma(j) xi p^j - ell_[j]`` over ``0 <= j1 < j2 <= span``.

    Three inequalities are checked for every pair: strict growth, doubling
    unless ``(sigma(j1), sigma(j2)) = (2, 1)``, and
    ``S(j2) - S(j) - S(j1) >= 1`` for every ``j`` strictly between. The
    doubling inequality genuinely fails for some pairs with the excluded
    sigma pattern, for example ``ell = 6`` when ``(p, f) = (3, 2)``.
    """
    top = 3 * params.f if span is None else span
    values = [window_value(params, ell, j) for j in range(top + 1)]
    sig = [sigma(params, ell, j) for j in range(top + 1)]
    grows = doubles = three = True
    for j2 in range(1, top + 1):
        for j1 in range(j2):
            grows = grows and values[j2] > values[j1]
            if (sig[j1], sig[j2]) != (2, 1):
                doubles = doubles and values[j2] > 2 * values[j1]
            three = three and all(
                values[j2] - values[j] - values[j1] >= 1 for j in range(j1 + 1, j2)
            )
    return [
        ExponentCheck("window-growth", ell, 0, grows),
        ExponentCheck("window-doubling", ell, 0, doubles),
        ExponentCheck("window-three-term", ell, 0, three),
    ]


def exponent_report(params: PrimeParams) -> ExponentReport:
    """Run every exponent check for every ``ell`` at ``(p, f)``.

    Binomial, structural, lower-bound and separation checks run over
    ``0 < ell < q - 1`` with the default ``D(ell)``, ``E(ell)`` and minimal
    ``N``; window checks also cover ``ell = 0``.
    """
    checks: list[ExponentCheck] = list(check_windows(params, 0))
    for ell in range(1, params.xi):
        system = exponents(params, ell)
        checks.extend(check_binomials(system))
        checks.extend(check_structure(system))
        checks.extend(check_lower_bounds(params, ell))
        checks.extend(check_separation(params, ell))
        checks.extend(check_windows(params, ell))
    logger.debug("exponent checks p={} f={}: {}", params.p, params.f, len(checks))
    return ExponentReport(params, tuple(checks))
