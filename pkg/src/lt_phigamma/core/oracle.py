"""A truncated-quotient oracle for phi-matrices and Gamma-stability.

The oracle never looks at the closed formulas of :func:`phi_matrix`. It turns
a presentation into a rewriting system on words ``t^m phi^s g``: for every
generator ``g`` a torsion exponent ``n_g`` and a rule

    t^slope phi g = sum c t^e phi^j g'

read off the defining relations. A word with ``s >= 1`` and
``m >= q^(s-1) slope`` is rewritten to
``sum c t^(m - q^(s-1) slope + q^(s-1) e) phi^(s-1+j) g'``; words with
``m >= q^s n_g`` vanish. What remains is a combination of ``t^m g`` with
``m < n_g`` and of the words spanning ``C``, so the coefficient of ``g``
itself is ``lambda_g``.

``phi(lambda_g)`` is then the unique ``sum_h P_h lambda_h`` with
``(t^K sum_h P_h lambda_h)(t^kappa phi z) = lambda_g(t^s z)`` when
``K + kappa = xi + q s`` and ``0`` otherwise, for all ``z`` in ``Delta`` and
``0 <= kappa <= xi``. The oracle solves these equations over ``k`` for the
coefficients of ``P_h`` in a window ``[-T, T]``, with ``z`` running over the
normal words of ``phi``-degree at most ``phi_depth``.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from lt_phigamma.core.arith import (
    FieldContext,
    FieldElem,
    LaurentPoly,
    PrimeParams,
    TruncSeries,
    WittElem,
    WittRing,
    field_make,
    solve_linear,
    witt_make,
)
from lt_phigamma.core.combinat import digits_of
from lt_phigamma.core.errors import OracleError, PrecisionError
from lt_phigamma.core.exponents import h_poly
from lt_phigamma.core.lubin_tate import (
    GammaKind,
    default_precision,
    gamma_sampler,
    lt_coeffs,
)
from lt_phigamma.core.presentation import (
    IrreduciblePresentation,
    PhiMatrix,
    Presentation,
    RankOnePresentation,
    ReduciblePresentation,
    ZeroPresentation,
)

type Word = tuple[int, int, str]
"""``(m, s, g)`` standing for ``t^m phi^s g``."""

type Normal = tuple[tuple[Word, FieldElem], ...]

# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiRule:
    """``t^slope phi g = sum coeff t^e phi^j target`` inside ``Delta``.

    Attributes:
        slope: The power of ``t`` in front of ``phi g``.
        terms: ``(e, j, target, coeff)`` tuples.
    """

    slope: int
    terms: tuple[tuple[int, int, str, FieldElem], ...]


@dataclass(frozen=True)
class Relations:
    """The rewriting system of one presentation.

    Attributes:
        field: The coefficient field.
        q: The Frobenius degree.
        kills: ``(g, n_g)`` with ``t^{n_g} g = 0``.
        rules: ``(g, rule)`` for every generator.
    """

    field: FieldContext
    q: int
    kills: tuple[tuple[str, int], ...]
    rules: tuple[tuple[str, PhiRule], ...]

    @cached_property
    def kill_map(self) -> dict[str, int]:
        return dict(self.kills)

    @cached_property
    def rule_map(self) -> dict[str, PhiRule]:
        return dict(self.rules)

    @property
    def generators(self) -> tuple[str, ...]:
        return tuple(g for g, _ in self.kills)

    def max_rule_degree(self) -> int:
        return max(j for _, rule in self.rules for _, j, _, _ in rule.terms)


def _relation_poly(pres: ReduciblePresentation) -> LaurentPoly:
    """``P(t)`` with ``R = t^xi phi x - alpha x + alpha beta^(1-N) P(t) phi^N y``."""
    params, ctx, system = pres.params, pres.field, pres.system
    out = LaurentPoly.zero(ctx)
    for i, bi in pres.b:
        out = out + LaurentPoly.monomial(ctx, system.r_d[i], bi)
    if pres.c:
        for o in system.o:
            out = out + LaurentPoly.monomial(ctx, o, pres.c)
    digits = digits_of(params, pres.ell)
    for i, ci in pres.c_e:
        head = LaurentPoly.monomial(ctx, system.n_e[i][0], ci)
        out = out + head * h_poly(params, ctx, digits.m_at(i), i)
    return out


def relations_of(pres: Presentation) -> Relations:
    """Read the rewriting system off a presentation's generators of ``nabla``."""
    ctx, q, xi = pres.field, pres.params.q, pres.params.xi
    match pres:
        case ReduciblePresentation(alpha=alpha, beta=beta, N=N):
            scale = ctx.neg(ctx.mul(alpha, ctx.pow(beta, 1 - N)))
            x_terms = [(0, 0, "x", alpha)]
            poly = _relation_poly(pres)
            x_terms += [
                (e, N, "y", ctx.mul(scale, c)) for e, c in sorted(poly.coeffs.items())
            ]
            return Relations(
                ctx,
                q,
                (("x", pres.n_x), ("y", pres.n_y)),
                (
                    ("x", PhiRule(xi, tuple(x_terms))),
                    ("y", PhiRule(xi, ((0, 0, "y", beta),))),
                ),
            )
        case ZeroPresentation(alpha=alpha, beta=beta, N=N):
            p = pres.params.p
            ab = ctx.mul(alpha, beta)
            scale = ctx.mul(ctx.mul(alpha, ctx.pow(beta, 1 - N)), ctx.sub(beta, alpha))
            x_terms = [(0, 0, "x", alpha), (0, 0, "y", ctx.mul(pres.e, ab))]
            x_terms += [
                (q**N - 1 - p**i * xi, N, "y", ctx.mul(scale, di)) for i, di in pres.d
            ]
            return Relations(
                ctx,
                q,
                (("x", pres.n_x), ("y", 1)),
                (
                    ("x", PhiRule(xi, tuple(t for t in x_terms if t[3]))),
                    ("y", PhiRule(xi, ((0, 0, "y", beta),))),
                ),
            )
        case RankOnePresentation():
            rule = PhiRule(xi, ((0, 0, "z", pres.eta),))
            return Relations(ctx, q, (("z", pres.N),), (("z", rule),))
        case IrreduciblePresentation():
            return Relations(
                ctx,
                q,
                (("x", pres.n_x), ("y", pres.n_y)),
                (
                    ("x", PhiRule(pres.nu, ((0, 0, "y", pres.a),))),
                    ("y", PhiRule(pres.mu, ((0, 0, "x", pres.b),))),
                ),
            )


def _accumulate(
    ctx: FieldContext, acc: dict[Word, FieldElem], normal: Normal, coeff: FieldElem
) -> None:
    for word, c in normal:
        value = ctx.add(acc.get(word, 0), ctx.mul(coeff, c))
        if value:
            acc[word] = value
        else:
            acc.pop(word, None)


@lru_cache(maxsize=1 << 18)
def _reduce(rel: Relations, m: int, s: int, g: str) -> Normal:
    n_g = rel.kill_map[g]
    if m >= rel.q**s * n_g:
        return ()
    if s == 0:
        return (((m, 0, g), 1),)
    rule = rel.rule_map[g]
    scale = rel.q ** (s - 1)
    if m < scale * rule.slope:
        return (((m, s, g), 1),)
    rest = m - scale * rule.slope
    acc: dict[Word, FieldElem] = {}
    for e, j, target, c in rule.terms:
        m2 = rest + scale * e
        if m2 < 0:
            raise OracleError(f"negative t-exponent while rewriting t^{m} phi^{s} {g}")
        _accumulate(rel.field, acc, _reduce(rel, m2, s - 1 + j, target), c)
    return tuple(sorted(acc.items()))


def reduce_word(rel: Relations, m: int, s: int, g: str) -> dict[Word, FieldElem]:
    """Normal form of ``t^m phi^s g`` in ``Delta``.

    Raises:
        OracleError: If rewriting does not terminate.
    """
    try:
        return dict(_reduce(rel, m, s, g))
    except RecursionError as exc:
        raise OracleError(f"rewriting of t^{m} phi^{s} {g} did not terminate") from exc


def dual_value(rel: Relations, word: Word, g: str) -> FieldElem:
    """``lambda_g`` evaluated at a word."""
    m, s, h = word
    return reduce_word(rel, m, s, h).get((0, 0, g), 0)


@lru_cache(maxsize=1 << 18)
def _dual_vector(rel: Relations, m: int, s: int, h: str) -> tuple[FieldElem, ...]:
    normal = reduce_word(rel, m, s, h)
    return tuple(normal.get((0, 0, g), 0) for g in rel.generators)


def normal_words(rel: Relations, depth: int) -> list[Word]:
    """The normal words of ``phi``-degree at most ``depth``."""
    out: list[Word] = []
    for g in rel.generators:
        n_g, slope = rel.kill_map[g], rel.rule_map[g].slope
        out.extend((m, 0, g) for m in range(n_g))
        for s in range(1, depth + 1):
            top = min(rel.q ** (s - 1) * slope, rel.q**s * n_g)
            out.extend((m, s, g) for m in range(top))
    return out


# ---------------------------------------------------------------------------
# The phi-matrix oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    """A phi-matrix recovered from the quotient.

    Attributes:
        matrix: Entries determined on the window.
        window: The exponent window ``(-T, T)`` searched.
        phi_depth: The largest ``phi``-degree of the test words.
        undetermined: ``(source, target, exponent)`` left free by the system.
    """

    matrix: PhiMatrix
    window: tuple[int, int]
    phi_depth: int
    undetermined: frozenset[tuple[str, str, int]] = field(default=frozenset())

    def agrees_with(self, expected: PhiMatrix) -> bool:
        """True when ``expected`` fits the window and matches every determined entry."""
        lo, hi = self.window
        if expected.window(lo, hi) != expected:
            return False
        for src in expected.basis:
            for dst in expected.basis:
                got, want = self.matrix.entry(src, dst), expected.entry(src, dst)
                for d in range(lo, hi + 1):
                    if (src, dst, d) in self.undetermined:
                        continue
                    if got.coeffs.get(d, 0) != want.coeffs.get(d, 0):
                        return False
        return self.matrix.gamma_character == expected.gamma_character

    def as_json(self) -> dict[str, object]:
        return {
            "matrix": self.matrix.as_json(),
            "window": list(self.window),
            "phi_depth": self.phi_depth,
            "undetermined": [list(u) for u in sorted(self.undetermined)],
        }


def default_t_depth(pres: Presentation) -> int:
    """A window half-width covering every exponent the relations can produce."""
    params = pres.params
    xi = params.xi
    match pres:
        case ReduciblePresentation():
            base = params.q**pres.N - 1
            spread = [abs(e - base) for e in _relation_poly(pres).coeffs]
            return max(spread, default=0) + xi
        case ZeroPresentation():
            return max((params.p**i * xi for i, _ in pres.d), default=0) + xi
        case RankOnePresentation():
            return xi
        case IrreduciblePresentation():
            return max(abs(pres.mu - xi), abs(pres.nu - xi)) + xi


def default_phi_depth(rel: Relations, t_depth: int) -> int:
    """Least depth whose test words reach every exponent of the window."""
    slope = max(rule.slope for _, rule in rel.rules)
    depth = 1
    while rel.q**depth <= 2 * t_depth + 2 * slope:
        depth += 1
    return depth


def gamma_exponents(pres: Presentation) -> dict[str, int]:
    """Power of ``a`` in ``gamma * g`` for ``[gamma] = a t``."""
    match pres:
        case ReduciblePresentation():
            return {"x": pres.u, "y": pres.u - pres.ell}
        case ZeroPresentation() | IrreduciblePresentation():
            return {"x": pres.u, "y": pres.u}
        case RankOnePresentation():
            return {"z": pres.w}


def delta_oracle(
    pres: Presentation, phi_depth: int | None = None, t_depth: int | None = None
) -> OracleResult:
    """Recompute the phi-matrix of ``pres`` from its quotient.

    Args:
        pres: A feasible presentation.
        phi_depth: Largest ``phi``-degree of the test words.
        t_depth: Half-width ``T`` of the exponent window.

    Returns:
        The determined entries, the window and the undetermined unknowns.

    Raises:
        OracleError: If the linear system is inconsistent, which means the
            window misses an exponent, or rewriting does not terminate.
    """
    rel = relations_of(pres)
    ctx, q, xi = rel.field, rel.q, pres.params.xi
    T = default_t_depth(pres) if t_depth is None else t_depth
    depth = default_phi_depth(rel, T) if phi_depth is None else phi_depth
    gens = rel.generators
    width = 2 * T + 1
    tests = normal_words(rel, depth)
    entries: dict[tuple[str, str], LaurentPoly] = {}
    undetermined: set[tuple[str, str, int]] = set()
    for g in gens:
        rows: list[NDArray[np.int32]] = []
        rhs: list[FieldElem] = []
        for theta, iota, h in tests:
            for kappa in range(xi + 1):
                row = np.zeros(len(gens) * width, dtype=np.int32)
                for e in range(-T, T + 1):
                    m = e + T + kappa + q * theta
                    duals = _dual_vector(rel, m, iota + 1, h)
                    for k, value in enumerate(duals):
                        row[k * width + e + T] = value
                s, rem = divmod(T + kappa, q)
                value = 0
                if rem == xi:
                    value = _dual_vector(rel, theta + s, iota, h)[gens.index(g)]
                if value or row.any():
                    rows.append(row)
                    rhs.append(value)
        values, free, consistent = solve_linear(ctx, rows, rhs)
        if not consistent:
            raise OracleError(
                f"inconsistent system for phi(lambda_{g}) at T={T}, depth={depth}"
            )
        for k, target in enumerate(gens):
            coeffs = {e: values.get(k * width + e + T, 0) for e in range(-T, T + 1)}
            entries[(g, target)] = LaurentPoly.make(ctx, coeffs)
            undetermined.update(
                (g, target, e) for e in range(-T, T + 1) if k * width + e + T in free
            )
    character = {g: -a for g, a in gamma_exponents(pres).items()}
    matrix = PhiMatrix.build(ctx, gens, entries, character)
    logger.debug(
        "oracle kind={} T={} depth={} tests={} undetermined={}",
        pres.kind,
        T,
        depth,
        len(tests),
        len(undetermined),
    )
    return OracleResult(matrix, (-T, T), depth, frozenset(undetermined))


# ---------------------------------------------------------------------------
# Gamma-stability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaSample:
    """``[gamma](t)`` modulo ``p`` with its first two coefficients.

    Attributes:
        label: How the unit was drawn.
        a1: ``a_{gamma,1}``, a unit of ``k``.
        aq: ``a_{gamma,q}``.
        series: ``[gamma](t)`` modulo ``p``; ``None`` stands for ``a1 t``.
    """

    label: str
    a1: FieldElem
    aq: FieldElem
    series: TruncSeries | None = None

    def series_to(self, ctx: FieldContext, trunc: int) -> TruncSeries:
        """``[gamma](t)`` known below ``trunc``.

        Raises:
            PrecisionError: If the stored series is too short.
        """
        if self.series is None:
            return TruncSeries.monomial(ctx, 1, trunc, self.a1)
        if self.series.trunc < trunc:
            raise PrecisionError(
                f"[gamma] known below t^{self.series.trunc}, need t^{trunc}"
            )
        return self.series.truncate(trunc)


def diagonal_gamma(a1: FieldElem) -> GammaSample:
    """The formal element with ``[gamma] = a1 t``."""
    return GammaSample("diagonal", a1, 0)


def gamma_from_unit(
    params: PrimeParams,
    ring: WittRing,
    unit: WittElem,
    t_bound: int,
    label: str = "unit",
) -> GammaSample:
    """Reduce the Lubin-Tate series of ``unit`` into the coefficient field.

    Args:
        params: The presentation parameters, ``e`` included.
        ring: The ring ``unit`` lives in.
        unit: A unit of ``ring``.
        t_bound: The largest t-degree to keep.
        label: Name reported by :class:`GammaCheck`.
    """
    series = lt_coeffs(ring, unit, t_bound).mod_p()
    ctx = field_make(params.p, params.f, params.e)
    coeffs = {d: ctx.embed(series.field, c) for d, c in series.items()}
    embedded = TruncSeries.make(ctx, coeffs, series.trunc)
    a1, aq = embedded.coeffs.get(1, 0), embedded.coeffs.get(params.q, 0)
    return GammaSample(label, a1, aq, embedded)


def required_precision(pres: Presentation) -> int:
    """Exclusive t-degree up to which ``[gamma]`` must be known."""
    rel = relations_of(pres)
    top = max(1, rel.max_rule_degree()) + _gamma_phi_degree(pres)
    return max(rel.q**top * n for _, n in rel.kills)


def standard_gammas(
    pres: Presentation, count: int = 2, rng_seed: int | None = 0
) -> list[GammaSample]:
    """Diagonal, Teichmuller, principal and random units for :func:`gamma_check`."""
    params = pres.params
    bound = required_precision(pres)
    ring = witt_make(params.p, params.f, default_precision(params.q, bound))
    out = [diagonal_gamma(pres.field.generator)]
    for kind in (GammaKind.TEICHMULLER, GammaKind.PRINCIPAL, GammaKind.RANDOM):
        for unit in gamma_sampler(ring, count, kind, rng_seed):
            out.append(gamma_from_unit(params, ring, unit, bound, str(kind)))
    return out


type Element = dict[tuple[int, str], TruncSeries]
"""``sum S_(s,g)(t) phi^s g`` keyed by ``(s, g)``."""


def _add_into(acc: Element, key: tuple[int, str], series: TruncSeries) -> None:
    acc[key] = acc[key] + series if key in acc else series


def _gamma_phi_degree(pres: Presentation) -> int:
    if isinstance(pres, ReduciblePresentation) and pres.c:
        return pres.N
    return 0


def _gamma_images(
    pres: Presentation, gamma: GammaSample, trunc: int
) -> dict[str, Element]:
    """``gamma * g`` for every generator, as elements of ``M``."""
    ctx, params = pres.field, pres.params
    series = gamma.series_to(ctx, trunc + 1)
    over_t = TruncSeries.make(ctx, {d - 1: c for d, c in series.items()}, trunc)
    series = series.truncate(trunc)
    t_over = over_t.inverse()
    a, ratio = gamma.a1, ctx.div(gamma.aq, gamma.a1)

    def twisted(power: int) -> TruncSeries:
        return t_over.scale(ctx.pow(a, power))

    match pres:
        case ReduciblePresentation():
            x_img: Element = {(0, "x"): twisted(pres.u + 1)}
            if pres.c and ratio:
                system = pres.system
                lead = ctx.pow(ratio, params.p ** (params.f - 1))
                g_series = series.scale(ctx.inv(a)).pow(system.r)
                coeff = ctx.neg(ctx.mul(pres.c, ctx.pow(pres.beta, 1 - pres.N)))
                coeff = ctx.mul(ctx.mul(coeff, lead), ctx.pow(a, pres.u))
                g_series = g_series.scale(coeff)
                x_img[(pres.N, "y")] = g_series.truncate(trunc)
            return {"x": x_img, "y": {(0, "y"): twisted(pres.u - pres.ell + 1)}}
        case ZeroPresentation():
            x_img = {(0, "x"): twisted(pres.u + 1)}
            coeff = 0
            for i, di in pres.d:
                coeff = ctx.add(coeff, ctx.mul(di, ctx.pow(ratio, params.p**i)))
            coeff = ctx.mul(coeff, ctx.mul(pres.alpha, pres.beta))
            coeff = ctx.mul(coeff, ctx.pow(a, pres.u))
            if coeff:
                x_img[(0, "y")] = TruncSeries.monomial(ctx, 0, trunc, coeff)
            y_img = {(0, "y"): TruncSeries.monomial(ctx, 0, trunc, ctx.pow(a, pres.u))}
            return {"x": x_img, "y": y_img}
        case RankOnePresentation():
            return {"z": {(0, "z"): twisted(pres.w + 1)}}
        case IrreduciblePresentation():
            return {
                "x": {(0, "x"): twisted(pres.u + 1)},
                "y": {(0, "y"): twisted(pres.u + 1)},
            }


def relation_elements(rel: Relations, trunc: int) -> dict[str, Element]:
    """The generators of ``nabla`` as elements of ``M``, labelled."""
    ctx = rel.field
    out: dict[str, Element] = {}
    for g, n_g in rel.kills:
        out[f"t^{n_g} {g}"] = {(0, g): TruncSeries.monomial(ctx, n_g, trunc)}
    for g, rule in rel.rules:
        element: Element = {(1, g): TruncSeries.monomial(ctx, rule.slope, trunc)}
        for e, j, target, c in rule.terms:
            term = TruncSeries.monomial(ctx, e, trunc, ctx.neg(c))
            _add_into(element, (j, target), term)
        out[f"phi {g}"] = element
    return out


def act(
    rel: Relations,
    images: Mapping[str, Element],
    series: TruncSeries,
    element: Element,
    trunc: int,
) -> Element:
    """``gamma * element`` given ``gamma * g`` and ``[gamma](t)``."""
    ctx, q = rel.field, rel.q
    powers: dict[int, TruncSeries] = {}

    def gamma_power(n: int) -> TruncSeries:
        if n not in powers:
            powers[n] = series.pow(n).truncate(trunc)
        return powers[n]

    out: Element = {}
    for (s, g), coeff_series in element.items():
        substituted = TruncSeries.make(ctx, {}, trunc)
        for n, c in coeff_series.items():
            substituted = substituted + gamma_power(n).scale(c)
        for (j, target), image in images[g].items():
            twisted = image.substitute_power(q**s).truncate(trunc)
            _add_into(out, (s + j, target), (substituted * twisted).truncate(trunc))
    return out


def reduces_to_zero(rel: Relations, element: Element) -> bool:
    """True when ``element`` lies in ``nabla``.

    Raises:
        PrecisionError: If a coefficient series stops before the torsion
            bound of its word.
    """
    ctx = rel.field
    acc: dict[Word, FieldElem] = {}
    for (s, g), series in element.items():
        bound = rel.q**s * rel.kill_map[g]
        if series.trunc < bound:
            raise PrecisionError(f"phi^{s} {g} known below t^{series.trunc} < {bound}")
        for m, c in series.items():
            _accumulate(ctx, acc, tuple(reduce_word(rel, m, s, g).items()), c)
    return not acc


@dataclass(frozen=True)
class GammaCheck:
    """Whether ``gamma`` maps one generator of ``nabla`` into ``nabla``."""

    gamma: str
    relation: str
    passed: bool


@dataclass(frozen=True)
class GammaReport:
    """All stability checks for one presentation."""

    checks: tuple[GammaCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[GammaCheck]:
        return [c for c in self.checks if not c.passed]

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.checks:
            out[c.gamma] = out.get(c.gamma, 0) + 1
        return out

    def as_json(self) -> dict[str, object]:
        return {
            "checked": len(self.checks),
            "counts": dict(sorted(self.counts().items())),
            "counterexamples": [
                {"gamma": c.gamma, "relation": c.relation} for c in self.failures()
            ],
        }


def gamma_check(pres: Presentation, gammas: Iterable[GammaSample]) -> GammaReport:
    """Check that every ``gamma`` preserves ``nabla``.

    Raises:
        PrecisionError: If a sample's series is shorter than
            :func:`required_precision`.
    """
    rel = relations_of(pres)
    trunc = required_precision(pres)
    relations = relation_elements(rel, trunc)
    checks: list[GammaCheck] = []
    for gamma in gammas:
        series = gamma.series_to(rel.field, trunc)
        images = _gamma_images(pres, gamma, trunc)
        for name, element in relations.items():
            moved = act(rel, images, series, element, trunc)
            checks.append(GammaCheck(gamma.label, name, reduces_to_zero(rel, moved)))
    report = GammaReport(tuple(checks))
    logger.debug(
        "gamma_check kind={} checks={} ok={}", pres.kind, len(checks), report.ok
    )
    return report
