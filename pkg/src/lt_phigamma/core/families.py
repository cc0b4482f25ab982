"""One-parameter families of presentations degenerating one stratum into another.

A family is a ``k[tau]``-module whose fibre at ``tau != 0`` lies in a reducible
stratum ``(ell_t, u_t, I_t)`` and whose fibre at ``tau = 0`` lies in a smaller
stratum. Two constructions exist:

* towards an irreducible ``[h]`` through one index ``i`` with ``Pi(i)`` in
  ``I_t`` (``D``-type when ``Pi(i)`` lies in ``D(ell_t)``, ``E``-type otherwise);
* towards another reducible ``(ell_b, u_b, I_b)`` through two indices
  ``i1 < i2 < i1 + f``, with a separate variant for ``ell_t = 0``.

Family parameters are plain integers and Laurent polynomials. The arithmetic
identities the constructions rely on are recorded as :class:`FamilyCheck`
entries, so exhaustive runs can report the instances where one of them fails.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from enum import StrEnum

from loguru import logger

from lt_phigamma.core.arith import FieldContext, FieldElem, LaurentPoly, PrimeParams
from lt_phigamma.core.combinat import (
    FSubset,
    de_split,
    digits_of,
    ell_at,
    nu_image,
    sigma,
)
from lt_phigamma.core.errors import InfeasiblePresentationError
from lt_phigamma.core.exponents import h_poly
from lt_phigamma.core.presentation import (
    Presentation,
    coefficient_field,
    irreducible_presentation,
    reducible_presentation,
    zero_presentation,
)
from lt_phigamma.core.strata import (
    Reducible,
    StratumE,
    irreducible,
    reducible,
    rhd_successors,
    stratum_key,
    stratum_to_json,
    window_sum,
)
from lt_phigamma.core.verifiers import DEFAULT_BUDGET, VerificationReport, check_budget


class FamilyKind(StrEnum):
    """The four family constructions."""

    TO_IRREDUCIBLE_D = "to-irreducible-d"
    TO_IRREDUCIBLE_E = "to-irreducible-e"
    REDUCIBLE_CHANGE = "reducible-change"
    REDUCIBLE_CHANGE_ZERO = "reducible-change-ell0"


@dataclass(frozen=True)
class FamilyCheck:
    """One arithmetic identity or inequality of a family.

    Attributes:
        name: Short identifier, e.g. ``"w-lower"`` or ``"target-shift[5]"``.
        passed: Whether it holds.
        detail: The two sides compared, for reports.
    """

    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class FamilySpec:
    """All data of one family.

    Attributes:
        params: The prime data.
        kind: The construction.
        source: The generic stratum ``(ell_t, u_t, I_t)``.
        indices: ``(i,)`` or ``(i1, i2)``.
        w: The shift between the two generators.
        n_x: Torsion exponent of ``x``.
        n_y: Torsion exponent of ``y``.
        N: Least Frobenius power with the required exponent range.
        a: Unit on the ``y``-relation.
        b: Unit on the ``x``-relation (``1`` for irreducible targets).
        alphas: Free coefficients of ``F`` on the indices strictly between
            ``i1`` and ``i2`` lying over ``I_t``.
        F: The polynomial ``F(t)``; zero for irreducible targets.
        G: The polynomial ``G(t)``.
        target: The stratum of the ``tau = 0`` fibre.
        ell_bar: Exponent of a reducible target, ``None`` otherwise.
        checks: The identities of this family.
    """

    params: PrimeParams
    kind: FamilyKind
    source: Reducible
    indices: tuple[int, ...]
    w: int
    n_x: int
    n_y: int
    N: int
    a: FieldElem
    b: FieldElem
    alphas: tuple[tuple[int, FieldElem], ...]
    F: LaurentPoly
    G: LaurentPoly
    target: StratumE
    ell_bar: int | None
    checks: tuple[FamilyCheck, ...]

    @property
    def field(self) -> FieldContext:
        return coefficient_field(self.params)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[FamilyCheck]:
        return [c for c in self.checks if not c.passed]

    def as_json(self) -> dict[str, object]:
        return {
            "kind": str(self.kind),
            "source": stratum_to_json(self.source),
            "indices": list(self.indices),
            "w": self.w,
            "n_x": self.n_x,
            "n_y": self.n_y,
            "N": self.N,
            "a": self.a,
            "b": self.b,
            "alphas": {str(i): c for i, c in self.alphas},
            "F": self.F.as_json(),
            "G": self.G.as_json(),
            "target": stratum_to_json(self.target),
            "checks": {c.name: c.passed for c in self.checks},
        }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _least_n(q: int, bound: int) -> int:
    """Least ``N >= 1`` with ``q^N - 1 >= bound``."""
    n = 1
    while q**n - 1 < bound:
        n += 1
    return n


def _check(name: str, lhs: int, rhs: int, relation: str = "==") -> FamilyCheck:
    match relation:
        case "==":
            passed = lhs == rhs
        case "<=":
            passed = lhs <= rhs
        case _:
            raise ValueError(f"unknown relation {relation!r}")
    return FamilyCheck(name, passed, f"{lhs} {relation} {rhs}")


def _order_check(name: str, poly: LaurentPoly, bound: int) -> FamilyCheck:
    """``poly - 1`` lies in ``t^bound k[[t]]``."""
    one = LaurentPoly.monomial(poly.field, 0, 1)
    rest = (poly - one).coeffs
    low = min(rest, default=bound)
    return FamilyCheck(name, low >= bound, f"lowest {low} >= {bound}")


def _one(ctx: FieldContext) -> LaurentPoly:
    return LaurentPoly.monomial(ctx, 0, 1)


def _h_factor(params: PrimeParams, ctx: FieldContext, ell: int, i: int) -> LaurentPoly:
    """``H(m_i, i - 2f)`` for an ``E``-index ``i >= 2f``."""
    m = digits_of(params, ell).m_at(i)
    return h_poly(params, ctx, m, i - 2 * params.f)


def _check_source(params: PrimeParams, ell_tilde: int, u_tilde: int) -> None:
    xi = params.xi
    if not 0 <= ell_tilde < xi:
        raise ValueError(f"ell_tilde must lie in [0, {xi - 1}], got {ell_tilde}")
    if not 0 <= u_tilde < xi:
        raise ValueError(f"u_tilde must lie in [0, {xi - 1}], got {u_tilde}")


# ---------------------------------------------------------------------------
# Degeneration into irreducibles
# ---------------------------------------------------------------------------


def family_to_irreducible(
    params: PrimeParams,
    ell_tilde: int,
    u_tilde: int,
    i: int,
    a: FieldElem = 1,
) -> FamilySpec:
    """The family through ``(ell_t, u_t, {Pi(i)})`` towards ``[h]``.

    ``f <= i < 2f`` with ``Pi(i)`` in ``D(ell_t)`` selects the ``D``-type
    family, ``0 <= i < f`` with ``i`` in ``E(ell_t)`` the ``E``-type one.
    The target is ``[h]`` with ``h = -w - (q + 1) u_t``, except for an
    ``E``-index with ``ell_t + 2 p^i = 0`` modulo ``q - 1``, where the family
    lands on the split ``(0, p^i + u_t, {})``.

    Raises:
        ValueError: If ``i`` fits neither type or the arguments are out of
            range.
        InfeasiblePresentationError: If ``q + 1`` divides ``w`` for a
            ``D``-type family.
    """
    _check_source(params, ell_tilde, u_tilde)
    if ell_tilde == 0:
        raise ValueError("ell_tilde must be non-zero")
    p, f, q, xi = params.p, params.f, params.q, params.xi
    ctx = coefficient_field(params)
    if a == 0 or a not in ctx.elements():
        raise ValueError(f"a must be a unit, got {a}")
    d_set, e_set = de_split(params, ell_tilde)
    split = False
    if f <= i < 2 * f and i in d_set:
        kind = FamilyKind.TO_IRREDUCIBLE_D
        lat = ell_at(params, ell_tilde, i)
        w = p**i * xi - lat
        n_x, n_y = (w + q) // q, w * xi // q
        G = _one(ctx)
        if w % (q + 1) == 0:
            raise InfeasiblePresentationError(f"q + 1 divides w = {w}")
    elif 0 <= i < f and i in e_set:
        kind = FamilyKind.TO_IRREDUCIBLE_E
        lat = ell_at(params, ell_tilde, i)
        m_i = digits_of(params, ell_tilde).m_at(i)
        w = 2 * p ** (2 * f + i) * xi - q * q * lat
        n_y = p ** (i + f) * xi * xi
        n_x = 1 + p ** (i + f) * (2 * q + m_i) - q * lat
        G = h_poly(params, ctx, m_i, i)
        split = (ell_tilde + 2 * p**i) % xi == 0
    else:
        raise ValueError(
            f"index {i} selects no family for ell_tilde={ell_tilde}: need "
            f"f <= i < 2f over D or 0 <= i < f over E"
        )
    nu, mu = q * n_x - w - 1, q + w - n_x
    target: StratumE
    if split:
        target = reducible(params, 0, p**i + u_tilde, FSubset.empty(f))
    else:
        target = irreducible(params, -w - (q + 1) * u_tilde)
    checks = [
        _check("torsion-window-low", n_y + n_x - 1, w, "<="),
        _check("torsion-window-high", w, q * (n_y - 1), "<="),
        _check("slopes-positive", 1, min(nu, mu), "<="),
        _check("nu-bound", nu, q * n_x - n_y, "<="),
        _check("mu-bound", mu, q * n_y - n_x, "<="),
        _order_check("G-order", G, max(n_x, n_y)),
    ]
    if kind is FamilyKind.TO_IRREDUCIBLE_D:
        checks.append(_check("nu-equals-xi", nu, xi))
        checks.append(_check("n_y-integral", q * n_y, w * xi))
    spec = FamilySpec(
        params=params,
        kind=kind,
        source=reducible(params, ell_tilde, u_tilde, FSubset.of(f, [i])),
        indices=(i,),
        w=w,
        n_x=n_x,
        n_y=n_y,
        N=_least_n(q, w),
        a=a,
        b=1,
        alphas=(),
        F=LaurentPoly.zero(ctx),
        G=G,
        target=target,
        ell_bar=0 if split else None,
        checks=tuple(checks),
    )
    logger.debug("family {} ell={} i={} w={}", kind, ell_tilde, i, w)
    return spec


# ---------------------------------------------------------------------------
# Degeneration into reducibles
# ---------------------------------------------------------------------------


def _middle(iset: FSubset, i1: int, i2: int) -> tuple[int, ...]:
    """Integers strictly between ``i1`` and ``i2`` lying over ``iset``."""
    return tuple(i for i in range(i1 + 1, i2) if i in iset)


def _alphas(
    ctx: FieldContext, middle: tuple[int, ...], alphas: Mapping[int, FieldElem] | None
) -> tuple[tuple[int, FieldElem], ...]:
    given = dict(alphas or {})
    extra = set(given) - set(middle)
    if extra:
        raise ValueError(f"alpha indices {sorted(extra)} not in {list(middle)}")
    out: list[tuple[int, FieldElem]] = []
    for i in middle:
        c = given.get(i, 1)
        if c not in ctx.elements():
            raise ValueError(f"alpha_{i}={c} is not a field element")
        out.append((i, c))
    return tuple(out)


def ell_bar_of(params: PrimeParams, ell_tilde: int, i1: int, i2: int) -> int:
    """The target exponent of a two-index family.

    ``2 sigma(i1) p^i1 - 2 sigma(i2) p^i2 - sum_{[i2, i1+f)} m_i p^i +
    sum_{[i1, i2)} m_i p^i`` modulo ``q - 1``; for ``ell_t = 0`` this is
    ``2 p^i1 - 2 p^i2``.
    """
    p, f, xi = params.p, params.f, params.xi
    m = digits_of(params, ell_tilde).m
    s1, s2 = sigma(params, ell_tilde, i1), sigma(params, ell_tilde, i2)
    value = 2 * s1 * p**i1 - 2 * s2 * p**i2
    value -= window_sum(params, m, i2, i1 + f)
    value += window_sum(params, m, i1, i2)
    return value % xi


def family_change_ell(
    params: PrimeParams,
    ell_tilde: int,
    u_tilde: int,
    iset_tilde: FSubset,
    i1: int,
    i2: int,
    a: FieldElem | None = None,
    b: FieldElem | None = None,
    alphas: Mapping[int, FieldElem] | None = None,
) -> FamilySpec:
    """The family through ``(ell_t, u_t, I_t)`` along ``i1 < i2 < i1 + f``.

    For ``ell_t != 0`` the indices satisfy ``2f <= i1``; for ``ell_t = 0``
    they satisfy ``f <= i1`` and ``b`` defaults to the inverse of a fixed
    non-square ``epsilon``. In both cases ``Pi(i1)`` and ``Pi(i2)`` must lie in
    ``I_t`` and ``I_t`` inside ``Pi([i1, i2])``.

    Raises:
        ValueError: On violated preconditions, and when ``ell_bar = 0``, in
            which case the degeneration is a one-index family instead.
    """
    _check_source(params, ell_tilde, u_tilde)
    p, f, q, xi = params.p, params.f, params.q, params.xi
    ctx = coefficient_field(params)
    low = f if ell_tilde == 0 else 2 * f
    if not low <= i1 < i2 < i1 + f:
        raise ValueError(f"need {low} <= i1 < i2 < i1 + {f}, got ({i1}, {i2})")
    if iset_tilde.f != f:
        raise ValueError(f"subset over f={iset_tilde.f}, expected f={f}")
    if i1 not in iset_tilde or i2 not in iset_tilde:
        raise ValueError("Pi(i1) and Pi(i2) must lie in the support")
    if not iset_tilde.issubset(FSubset.interval(f, i1, i2)):
        raise ValueError("the support must lie in Pi([i1, i2])")
    middle = _middle(iset_tilde, i1, i2)
    alpha_t = _alphas(ctx, middle, alphas)
    ell_bar = ell_bar_of(params, ell_tilde, i1, i2)
    if ell_bar == 0:
        raise ValueError(
            "ell_bar = 0: this degeneration is a one-index family "
            "(use family_to_irreducible)"
        )
    if ell_tilde == 0:
        return _change_from_zero(
            params, u_tilde, iset_tilde, i1, i2, a, b, alpha_t, ell_bar
        )
    a = 1 if a is None else a
    b = 1 if b is None else b
    for name, value in (("a", a), ("b", b)):
        if value == 0 or value not in ctx.elements():
            raise ValueError(f"{name} must be a unit, got {value}")

    s1, s2 = sigma(params, ell_tilde, i1), sigma(params, ell_tilde, i2)
    lat1, lat2 = ell_at(params, ell_tilde, i1), ell_at(params, ell_tilde, i2)
    head = s2 * xi * p**i2 - lat2
    if head % q or (lat2 - lat1) % xi:
        raise InfeasiblePresentationError(
            f"non-integral parameters at ell_tilde={ell_tilde}, ({i1}, {i2})"
        )
    n_x = n_y = 1 + head // q
    w = s2 * p**i2 - s1 * p**i1 - (lat2 - lat1) // xi
    u_bar = (u_tilde - ell_tilde - w) % xi
    iset_bar = nu_image(params, ell_tilde, ell_bar, iset_tilde - FSubset.of(f, [i1]))

    def shift(i: int) -> int:
        return head - sigma(params, ell_tilde, i) * xi * p**i + ell_at(
            params, ell_tilde, i
        )

    F = _one(ctx) if s2 == 1 else _h_factor(params, ctx, ell_tilde, i2)
    for i, c in alpha_t:
        term = LaurentPoly.monomial(ctx, shift(i), c)
        if sigma(params, ell_tilde, i) == 2:
            term = term * _h_factor(params, ctx, ell_tilde, i)
        F = F + term
    G = _one(ctx) if s1 == 1 else _h_factor(params, ctx, ell_tilde, i1)

    def sigma_bar(i: int) -> int:
        both = sigma(params, ell_tilde, i) == 2 and sigma(params, ell_bar, i) == 2
        return 2 if both else 1

    m = digits_of(params, ell_tilde).m
    checks = [
        _check("slope-identity", xi * w - q * (n_x - 1), lat1 - s1 * xi * p**i1),
        _check(
            "w-window",
            w,
            s2 * p**i2 - s1 * p**i1 - window_sum(params, m, i1, i2),
        ),
        _check("ell-bar-congruence", (ell_bar + ell_tilde + 2 * w) % xi, 0),
        _check("n_x-congruence", (n_x - 1 + ell_tilde) % xi, 0),
        _check(
            "target-head",
            q * (n_x - 2 * w - 1),
            ell_at(params, ell_bar, i2) - sigma_bar(i2) * xi * p**i2,
        ),
    ]
    for i in middle:
        checks.append(
            _check(
                f"target-shift[{i}]",
                q * (n_x - 2 * w - 1) + shift(i),
                ell_at(params, ell_bar, i) - sigma_bar(i) * xi * p**i,
            )
        )
    checks += _shared_checks(params, n_x, n_y, w, i1, F, G)
    spec = FamilySpec(
        params=params,
        kind=FamilyKind.REDUCIBLE_CHANGE,
        source=reducible(params, ell_tilde, u_tilde, iset_tilde),
        indices=(i1, i2),
        w=w,
        n_x=n_x,
        n_y=n_y,
        N=_least_n(q, max(q * (2 * w + 1 - n_x), q * (n_x - 1))),
        a=a,
        b=b,
        alphas=alpha_t,
        F=F,
        G=G,
        target=reducible(params, ell_bar, u_bar, iset_bar),
        ell_bar=ell_bar,
        checks=tuple(checks),
    )
    logger.debug(
        "family change ell={} ({}, {}) -> ell_bar={} w={}",
        ell_tilde,
        i1,
        i2,
        ell_bar,
        w,
    )
    return spec


def _shared_checks(
    params: PrimeParams,
    n_x: int,
    n_y: int,
    w: int,
    i1: int,
    F: LaurentPoly,
    G: LaurentPoly,
) -> list[FamilyCheck]:
    """The inequalities common to both two-index constructions."""
    f, q, xi = params.f, params.q, params.xi
    return [
        _check("w-lower", q * n_x, xi * (2 * w + 1), "<="),
        _check("n_y-gap", n_y, xi * (n_x - 1 - w), "<="),
        _check("n_y-at-least-n_x", n_x, n_y, "<="),
        _check("n_x-ceiling", n_x * params.p**f, xi * xi * params.p**i1, "<="),
        _order_check("F-order", F, q * n_x - xi * (w + 1)),
        _order_check("G-order", G, max(n_x, n_y - w)),
    ]


def epsilon_default(ctx: FieldContext) -> FieldElem:
    """The fixed non-square of ``ctx``, or ``1`` when every unit is a square."""
    eps = ctx.non_square()
    return 1 if eps is None else eps


def _change_from_zero(
    params: PrimeParams,
    u_tilde: int,
    iset_tilde: FSubset,
    i1: int,
    i2: int,
    a: FieldElem | None,
    b: FieldElem | None,
    alpha_t: tuple[tuple[int, FieldElem], ...],
    ell_bar: int,
) -> FamilySpec:
    p, f, q, xi = params.p, params.f, params.q, params.xi
    ctx = coefficient_field(params)
    a = 1 if a is None else a
    b = ctx.inv(epsilon_default(ctx)) if b is None else b
    for name, value in (("a", a), ("b", b)):
        if value == 0 or value not in ctx.elements():
            raise ValueError(f"{name} must be a unit, got {value}")
    n_x = n_y = 1 + xi * p**i2 // q
    w = p**i2 - p**i1
    F = _one(ctx)
    for i, c in alpha_t:
        F = F + LaurentPoly.monomial(ctx, xi * p**i2 - xi * p**i, c)
    G = _one(ctx)
    checks = [
        _check("ell-bar-congruence", (ell_bar + 2 * w) % xi, 0),
        *_shared_checks(params, n_x, n_y, w, i1, F, G),
    ]
    return FamilySpec(
        params=params,
        kind=FamilyKind.REDUCIBLE_CHANGE_ZERO,
        source=reducible(params, 0, u_tilde, iset_tilde),
        indices=(i1, i2),
        w=w,
        n_x=n_x,
        n_y=n_y,
        N=_least_n(q, max(q * (2 * w + 1 - n_x), q * (n_x - 1))),
        a=a,
        b=b,
        alphas=alpha_t,
        F=F,
        G=G,
        target=reducible(
            params,
            ell_bar,
            u_tilde - w,
            nu_image(params, 0, ell_bar, iset_tilde - FSubset.of(f, [i1])),
        ),
        ell_bar=ell_bar,
        checks=tuple(checks),
    )


# ---------------------------------------------------------------------------
# Fibres
# ---------------------------------------------------------------------------


def _keyed(
    params: PrimeParams, entries: list[tuple[int, int, FieldElem]]
) -> tuple[dict[int, FieldElem], dict[int, FieldElem]]:
    """Split ``(index, sigma, coeff)`` into ``D``-keys ``i`` and ``E``-keys
    ``i - 2f``."""
    b: dict[int, FieldElem] = {}
    c_e: dict[int, FieldElem] = {}
    for i, s, coeff in entries:
        if s == 1:
            b[i] = coeff
        else:
            c_e[i - 2 * params.f] = coeff
    return b, c_e


def family_fiber(spec: FamilySpec, tau: FieldElem) -> Presentation:
    """The presentation of the fibre of ``spec`` at ``tau``.

    At ``tau != 0`` the fibre is a reducible (or ``ell = 0``) presentation of
    the source stratum; at ``tau = 0`` it is the presentation on the
    alternate generators, whose stratum is ``spec.target``.

    Raises:
        ValueError: If ``tau`` is not a field element, or if
            ``b tau^2 = a`` for an ``ell_t = 0`` family.
    """
    params, ctx = spec.params, spec.field
    if tau not in ctx.elements():
        raise ValueError(f"tau={tau} is not an element of the coefficient field")
    ell_t, u_t = spec.source.ell, spec.source.u
    a, b = spec.a, spec.b
    a_inv = ctx.inv(a)
    match spec.kind:
        case FamilyKind.TO_IRREDUCIBLE_D | FamilyKind.TO_IRREDUCIBLE_E:
            q, w = params.q, spec.w
            (i,) = spec.indices
            if tau == 0:
                return irreducible_presentation(
                    params,
                    nu=q * spec.n_x - w - 1,
                    mu=q + w - spec.n_x,
                    u=u_t,
                    a=a,
                    b=1,
                    n_x=spec.n_x,
                    n_y=spec.n_y,
                )
            coeffs = {i: a_inv}
            alpha = ctx.neg(ctx.div(a, tau))
            if spec.kind is FamilyKind.TO_IRREDUCIBLE_D:
                return reducible_presentation(
                    params, ell_t, u_t, alpha=alpha, beta=tau, b=coeffs
                )
            return reducible_presentation(
                params, ell_t, u_t, alpha=alpha, beta=tau, c_e=coeffs
            )
        case FamilyKind.REDUCIBLE_CHANGE:
            return _change_fiber(spec, tau)
        case FamilyKind.REDUCIBLE_CHANGE_ZERO:
            return _zero_fiber(spec, tau)


def _change_fiber(spec: FamilySpec, tau: FieldElem) -> Presentation:
    params, ctx = spec.params, spec.field
    ell_t, u_t = spec.source.ell, spec.source.u
    i1, i2 = spec.indices
    a, b = spec.a, spec.b
    assert spec.ell_bar is not None
    if tau == 0:
        ell_b = spec.ell_bar
        target = spec.target
        assert isinstance(target, Reducible)
        b_inv = ctx.inv(b)

        def s_bar(i: int) -> int:
            both = sigma(params, ell_t, i) == 2 and sigma(params, ell_b, i) == 2
            return 2 if both else 1

        entries = [(i2, s_bar(i2), b_inv)]
        entries += [
            (i, s_bar(i), ctx.neg(ctx.mul(b_inv, c))) for i, c in spec.alphas
        ]
        d_keys, e_keys = _keyed(params, entries)
        return reducible_presentation(
            params, ell_b, target.u, alpha=b, beta=a, b=d_keys, c_e=e_keys
        )
    a_inv = ctx.inv(a)
    scaled = ctx.mul(tau, a_inv)
    entries = [
        (i1, sigma(params, ell_t, i1), a_inv),
        (i2, sigma(params, ell_t, i2), scaled),
    ]
    entries += [
        (i, sigma(params, ell_t, i), ctx.mul(scaled, c)) for i, c in spec.alphas
    ]
    d_keys, e_keys = _keyed(params, entries)
    return reducible_presentation(
        params,
        ell_t,
        u_t,
        alpha=ctx.div(a, tau),
        beta=ctx.mul(b, tau),
        b=d_keys,
        c_e=e_keys,
    )


def _zero_fiber(spec: FamilySpec, tau: FieldElem) -> Presentation:
    params, ctx = spec.params, spec.field
    i1, i2 = spec.indices
    a, b = spec.a, spec.b
    if tau == 0:
        target = spec.target
        assert isinstance(target, Reducible) and spec.ell_bar is not None
        b_inv = ctx.inv(b)
        d_keys = {i2: b_inv}
        for i, c in spec.alphas:
            d_keys[i] = ctx.neg(ctx.mul(b_inv, c))
        return reducible_presentation(
            params, spec.ell_bar, target.u, alpha=b, beta=a, b=d_keys
        )
    gap = ctx.sub(ctx.mul(b, ctx.mul(tau, tau)), a)
    if gap == 0:
        raise ValueError(f"tau={tau} lies on the excluded locus b tau^2 = a")
    a_inv = ctx.inv(a)
    scale = ctx.neg(ctx.inv(gap))
    tau2 = ctx.mul(tau, tau)
    d = {
        i1: ctx.mul(scale, ctx.mul(tau, a_inv)),
        i2: ctx.mul(scale, ctx.mul(tau2, a_inv)),
    }
    for i, c in spec.alphas:
        d[i] = ctx.mul(scale, ctx.mul(tau2, ctx.mul(a_inv, c)))
    return zero_presentation(
        params,
        spec.source.u,
        alpha=ctx.div(a, tau),
        beta=ctx.mul(b, tau),
        d=d,
    )


# ---------------------------------------------------------------------------
# Enumeration and cross-checks
# ---------------------------------------------------------------------------


def family_specs(params: PrimeParams, u_tilde: int = 0) -> Iterator[FamilySpec]:
    """Every family with source twist ``u_tilde`` and default coefficients."""
    f, xi = params.f, params.xi
    for ell_t in range(1, xi):
        _, e_set = de_split(params, ell_t)
        for x in range(f):
            i = x if x in e_set else x + f
            yield family_to_irreducible(params, ell_t, u_tilde, i)
    for ell_t in range(xi):
        low = f if ell_t == 0 else 2 * f
        for i1 in range(low, low + f):
            for i2 in range(i1 + 1, i1 + f):
                if ell_bar_of(params, ell_t, i1, i2) == 0:
                    continue
                base = FSubset.of(f, [i1, i2])
                extra = list(_middle(FSubset.full(f), i1, i2))
                for mask in range(1 << len(extra)):
                    chosen = [j for k, j in enumerate(extra) if mask >> k & 1]
                    iset = base | FSubset.of(f, chosen)
                    yield family_change_ell(params, ell_t, u_tilde, iset, i1, i2)


@dataclass(frozen=True)
class FamilyEdge:
    """A degeneration ``source |> target`` realised by a family."""

    source: StratumE
    target: StratumE
    kind: FamilyKind
    indices: tuple[int, ...]

    def as_json(self) -> dict[str, object]:
        return {
            "source": stratum_to_json(self.source),
            "target": stratum_to_json(self.target),
            "kind": str(self.kind),
            "indices": list(self.indices),
        }


def rhd_edges_from_families(params: PrimeParams) -> list[FamilyEdge]:
    """All edges produced by families, over every source twist."""
    edges = {
        FamilyEdge(spec.source, spec.target, spec.kind, spec.indices)
        for u in range(params.xi)
        for spec in family_specs(params, u)
    }
    return sorted(
        edges,
        key=lambda e: (stratum_key(e.source), stratum_key(e.target), e.indices),
    )


def _trivial_targets(params: PrimeParams, source: Reducible) -> set[StratumE]:
    """Shrinking the support and swapping the split extension."""
    return {
        reducible(params, source.ell, source.u, sub)
        for sub in FSubset.all_subsets(params.f)
        if sub.issubset(source.iset)
    }


def family_edges_report(
    params: PrimeParams, budget: int = DEFAULT_BUDGET
) -> VerificationReport:
    """Compare family edges with ``|>`` in both directions.

    Every family edge must be a ``|>`` edge, and every ``|>`` edge out of a
    family source other than shrinking or swapping must come from a family.
    """
    check_budget(params, budget)
    edges = rhd_edges_from_families(params)
    bad: list[dict[str, object]] = []
    by_source: dict[StratumE, set[StratumE]] = {}
    for edge in edges:
        by_source.setdefault(edge.source, set()).add(edge.target)
        if edge.target not in rhd_successors(params, edge.source):
            bad.append({"missing_from_rhd": edge.as_json()})
    for source in sorted(by_source, key=stratum_key):
        assert isinstance(source, Reducible)
        targets = by_source[source]
        expected = rhd_successors(params, source) - _trivial_targets(params, source)
        for target in sorted(expected - targets, key=stratum_key):
            bad.append(
                {
                    "missing_from_families": {
                        "source": stratum_to_json(source),
                        "target": stratum_to_json(target),
                    }
                }
            )
    logger.debug("family edges p={} f={}: {} edges", params.p, params.f, len(edges))
    return VerificationReport("family-edges", params, len(edges), tuple(bad))


def family_report(
    params: PrimeParams, budget: int = DEFAULT_BUDGET
) -> VerificationReport:
    """Every family identity at ``u_t = 0``; failing checks are listed."""
    check_budget(params, budget)
    bad: list[dict[str, object]] = []
    checked = 0
    for spec in family_specs(params):
        checked += 1
        for c in spec.failures():
            bad.append(
                {
                    "kind": str(spec.kind),
                    "source": stratum_to_json(spec.source),
                    "indices": list(spec.indices),
                    "check": c.name,
                    "detail": c.detail,
                }
            )
    return VerificationReport("families", params, checked, tuple(bad))
