"""Explicit presentations of rank-one and rank-two (phi, Gamma)-modules.

Every presentation describes a quotient ``Delta = M / nabla`` of the free
``k[[t]][phi]``-module ``M`` on one or two generators. Four shapes occur:

* :class:`ReduciblePresentation` for ``0 < ell < q - 1``, generated by
  ``t^{n_y} y``, ``t^xi phi y - beta y``, ``t^{n_x} x`` and
  ``R = t^xi phi x - alpha x + alpha beta^(1-N) P(t) phi^N y`` with
  ``P = sum_D b_i t^{r_i} + c sum_i t^{o_i} + sum_E c_i t^{n_i^(0)} H(m_i, i)``;
* :class:`ZeroPresentation` for ``ell = 0``, generated by ``t^{n_x} x``,
  ``t y``, ``t^xi phi y - beta y`` and
  ``R = t^xi phi x - alpha x - e alpha beta y
  - alpha beta^(1-N) (beta - alpha) sum_D d_i t^(q^N - 1 - p^i xi) phi^N y``;
* :class:`RankOnePresentation` ``E(eta, w)``, generated by ``t^N z`` and
  ``t^xi phi z - eta z``;
* :class:`IrreduciblePresentation`, generated by ``t^{n_x} x``, ``t^{n_y} y``,
  ``t^mu phi y - b x`` and ``t^nu phi x - a y``.

:func:`phi_matrix` returns the matrix of ``phi`` on the dual basis
``lambda_x, lambda_y`` singled out by ``lambda_g(g) = 1`` and vanishing on
``t k[[t]] V`` and on the span of the words ``t^theta phi^s g`` with
``theta < q^(s-1) * slope``. The off-diagonal entries carry the sign forced by
the relations above; :mod:`lt_phigamma.core.oracle` recomputes them from the
quotient directly.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from loguru import logger

from lt_phigamma.core.arith import (
    FieldContext,
    FieldElem,
    LaurentPoly,
    PrimeParams,
    binomial_mod_p,
    field_make,
)
from lt_phigamma.core.combinat import FSubset, de_split, digits_of, ell_at, i_d, m_d
from lt_phigamma.core.errors import InfeasiblePresentationError
from lt_phigamma.core.exponents import (
    ExponentSystem,
    cyclotomic_point,
    exponents,
    minimal_n,
)
from lt_phigamma.core.strata import StratumE, irreducible, reducible
from lt_phigamma.core.strata import Irreducible as IrreducibleStratum
from lt_phigamma.core.strata import Reducible as ReducibleStratum

type Coeffs = tuple[tuple[int, FieldElem], ...]
"""Sparse coefficient tuple: sorted ``(index, non-zero coefficient)`` pairs."""


class PresentationKind(StrEnum):
    """The four presentation shapes."""

    REDUCIBLE = "reducible"
    ZERO = "reducible-ell0"
    RANK_ONE = "rank-one"
    IRREDUCIBLE = "irreducible"


def coefficient_field(params: PrimeParams) -> FieldContext:
    """The coefficient field ``k = F_{p^{fe}}`` of every presentation."""
    return field_make(params.p, params.f, params.e)


def _check_elem(ctx: FieldContext, value: FieldElem, name: str) -> None:
    if not 0 <= value < ctx.size:
        raise ValueError(f"{name}={value} is not an element of F_{ctx.size}")


def _check_unit(ctx: FieldContext, value: FieldElem, name: str) -> None:
    _check_elem(ctx, value, name)
    if value == 0:
        raise ValueError(f"{name} must be a unit")


def make_coeffs(
    ctx: FieldContext, values: Mapping[int, FieldElem] | None, name: str = "coeff"
) -> Coeffs:
    """Normalize a coefficient mapping: sorted, zeros dropped.

    Raises:
        ValueError: On a negative index or a value outside the field.
    """
    if values is None:
        return ()
    out: list[tuple[int, FieldElem]] = []
    for i, c in sorted(values.items()):
        if i < 0:
            raise ValueError(f"{name} index must be non-negative, got {i}")
        _check_elem(ctx, c, f"{name}_{i}")
        if c:
            out.append((i, c))
    return tuple(out)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------


def reducible_violations(
    params: PrimeParams,
    ell: int,
    d_set: tuple[int, ...],
    e_set: tuple[int, ...],
    with_c: bool,
    n_x: int,
    n_y: int,
) -> list[str]:
    """The defining inequalities of a reducible presentation that fail."""
    p, f, q, xi = params.p, params.f, params.q, params.xi
    out: list[str] = []
    if n_x < 1 or n_y < 1:
        out.append(f"n_x={n_x} and n_y={n_y} must be positive")
    for i in d_set:
        li = ell_at(params, ell, i)
        if li < n_y:
            out.append(f"ell_[{i}]={li} < n_y={n_y}")
        if q * n_x + li - xi * (p**i + 1) < n_y:
            out.append(f"q n_x + ell_[{i}] - xi (p^{i} + 1) < n_y")
    for i in e_set:
        li = ell_at(params, ell, i)
        spread = q - sum(p**s for s in range(f))
        if q * q * li - p ** (i + f) * xi * spread < n_y:
            out.append(f"q^2 ell_[{i}] - p^(i+f) xi (q - sum p^s) < n_y")
        if q * n_x + q * q * li - xi * (2 * p ** (2 * f + i) + 1) < n_y:
            out.append(f"q n_x + q^2 ell_[{i}] - xi (2 p^(2f+{i}) + 1) < n_y")
    if with_c:
        if xi < n_y:
            out.append(f"c != 0 needs n_y <= xi, got {n_y}")
        if q == p and p - 2 < n_y:
            out.append(f"c != 0 with q = p needs n_y <= p - 2, got {n_y}")
        if n_x - p ** (f - 1) * xi // (p - 1) < n_y:
            out.append("c != 0 needs n_x - p^(f-1) xi / (p - 1) >= n_y")
        if q == p and p * (n_x - 3) + 2 < n_y:
            out.append("c != 0 with q = p needs p (n_x - 3) + 2 >= n_y")
    return out


def least_n_x(
    params: PrimeParams,
    ell: int,
    d_set: tuple[int, ...],
    e_set: tuple[int, ...],
    with_c: bool,
    n_y: int,
) -> int:
    """Least ``n_x >= 1`` meeting every ``n_x``-dependent inequality."""
    p, f, q, xi = params.p, params.f, params.q, params.xi
    bounds = [1]
    for i in d_set:
        li = ell_at(params, ell, i)
        bounds.append(_ceil_div(n_y - li + xi * (p**i + 1), q))
    for i in e_set:
        li = ell_at(params, ell, i)
        bounds.append(_ceil_div(n_y - q * q * li + xi * (2 * p ** (2 * f + i) + 1), q))
    if with_c:
        bounds.append(n_y + p ** (f - 1) * xi // (p - 1))
        if q == p:
            bounds.append(_ceil_div(n_y - 2, p) + 3)
    return max(bounds)


# ---------------------------------------------------------------------------
# Presentation types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReduciblePresentation:
    """An extension of ``E(beta, u - ell)`` by ``E(alpha, u)`` with ``ell != 0``.

    Attributes:
        params: The prime data.
        ell: The exponent, ``0 < ell < q - 1``.
        u: The twist, ``0 <= u < q - 1``.
        alpha: Eigenvalue on ``x``.
        beta: Eigenvalue on ``y``.
        b: Coefficients ``b_i`` on the exponents ``r_i``.
        c_e: Coefficients ``c_i`` on the exponents ``n_i^(j)``.
        c: The cyclotomic coefficient.
        N: The auxiliary Frobenius power.
        n_x: Torsion exponent of ``x``.
        n_y: Torsion exponent of ``y``.
    """

    params: PrimeParams
    ell: int
    u: int
    alpha: FieldElem
    beta: FieldElem
    b: Coeffs
    c_e: Coeffs
    c: FieldElem
    N: int
    n_x: int
    n_y: int

    def __post_init__(self) -> None:
        ctx = self.field
        xi = self.params.xi
        if not 0 < self.ell < xi:
            raise ValueError(f"ell must lie in (0, {xi}), got {self.ell}")
        if not 0 <= self.u < xi:
            raise ValueError(f"u must lie in [0, {xi}), got {self.u}")
        _check_unit(ctx, self.alpha, "alpha")
        _check_unit(ctx, self.beta, "beta")
        _check_elem(ctx, self.c, "c")
        cyclotomic = self.ell == cyclotomic_point(self.params)
        if self.c and not (cyclotomic and self.alpha == self.beta):
            raise InfeasiblePresentationError(
                "c != 0 needs ell = (p - 2) xi / (p - 1) and alpha = beta"
            )
        try:
            _ = self.system
        except ValueError as exc:
            raise InfeasiblePresentationError(str(exc)) from exc
        problems = reducible_violations(
            self.params,
            self.ell,
            self.d_set,
            self.e_set,
            bool(self.c),
            self.n_x,
            self.n_y,
        )
        if problems:
            raise InfeasiblePresentationError("; ".join(problems))

    @property
    def kind(self) -> PresentationKind:
        return PresentationKind.REDUCIBLE

    @property
    def field(self) -> FieldContext:
        return coefficient_field(self.params)

    @property
    def d_set(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.b)

    @property
    def e_set(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.c_e)

    @property
    def system(self) -> ExponentSystem:
        """The exponents ``r, o_i, r_i, n_i^(j)`` at this ``N``."""
        return exponents(self.params, self.ell, self.N, self.d_set, self.e_set)


@dataclass(frozen=True)
class ZeroPresentation:
    """An extension of ``E(beta, u)`` by ``E(alpha, u)``, the case ``ell = 0``.

    Attributes:
        params: The prime data.
        u: The twist.
        alpha: Eigenvalue on ``x``.
        beta: Eigenvalue on ``y``.
        d: Coefficients ``d_i``.
        e: The coefficient of ``y`` in ``R``.
        N: The auxiliary Frobenius power.
        n_x: Torsion exponent of ``x``; ``y`` is killed by ``t``.
    """

    params: PrimeParams
    u: int
    alpha: FieldElem
    beta: FieldElem
    d: Coeffs
    e: FieldElem
    N: int
    n_x: int

    def __post_init__(self) -> None:
        ctx = self.field
        p, q, xi = self.params.p, self.params.q, self.params.xi
        if not 0 <= self.u < xi:
            raise ValueError(f"u must lie in [0, {xi}), got {self.u}")
        _check_unit(ctx, self.alpha, "alpha")
        _check_unit(ctx, self.beta, "beta")
        _check_elem(ctx, self.e, "e")
        problems: list[str] = []
        if self.N < 1 or self.n_x < 1:
            problems.append(f"N={self.N} and n_x={self.n_x} must be positive")
        for i, _ in self.d:
            if q**self.N < p**i * xi + 1:
                problems.append(f"q^N < p^{i} xi + 1")
            if q * (self.n_x - 1) < p**i * xi - 1:
                problems.append(f"q (n_x - 1) < p^{i} xi - 1")
        if problems:
            raise InfeasiblePresentationError("; ".join(problems))

    @property
    def kind(self) -> PresentationKind:
        return PresentationKind.ZERO

    @property
    def field(self) -> FieldContext:
        return coefficient_field(self.params)

    @property
    def ell(self) -> int:
        return 0

    @property
    def n_y(self) -> int:
        return 1


@dataclass(frozen=True)
class RankOnePresentation:
    """The rank-one module ``E(eta, w)``; ``N`` only fixes the truncation."""

    params: PrimeParams
    eta: FieldElem
    w: int
    N: int = 1

    def __post_init__(self) -> None:
        _check_unit(self.field, self.eta, "eta")
        if self.N < 1:
            raise InfeasiblePresentationError(f"N must be positive, got {self.N}")

    @property
    def kind(self) -> PresentationKind:
        return PresentationKind.RANK_ONE

    @property
    def field(self) -> FieldContext:
        return coefficient_field(self.params)


@dataclass(frozen=True)
class IrreduciblePresentation:
    """The two-generator presentation swapping ``x`` and ``y`` under ``phi``.

    Attributes:
        params: The prime data.
        a: Coefficient in ``t^nu phi x - a y``.
        b: Coefficient in ``t^mu phi y - b x``.
        nu: Slope of ``x``.
        mu: Slope of ``y``.
        u: The Gamma twist.
        n_x: Torsion exponent of ``x``.
        n_y: Torsion exponent of ``y``.
    """

    params: PrimeParams
    a: FieldElem
    b: FieldElem
    nu: int
    mu: int
    u: int
    n_x: int
    n_y: int

    def __post_init__(self) -> None:
        ctx = self.field
        q = self.params.q
        _check_unit(ctx, self.a, "a")
        _check_unit(ctx, self.b, "b")
        problems: list[str] = []
        if min(self.nu, self.mu, self.n_x, self.n_y) < 1:
            problems.append("nu, mu, n_x and n_y must be positive")
        if self.nu > q * self.n_x - self.n_y:
            problems.append(f"nu={self.nu} > q n_x - n_y")
        if self.mu > q * self.n_y - self.n_x:
            problems.append(f"mu={self.mu} > q n_y - n_x")
        if problems:
            raise InfeasiblePresentationError("; ".join(problems))

    @property
    def kind(self) -> PresentationKind:
        return PresentationKind.IRREDUCIBLE

    @property
    def field(self) -> FieldContext:
        return coefficient_field(self.params)

    @property
    def alpha(self) -> FieldElem:
        """The scalar of ``phi^2`` on the dual basis, ``(a b)^-1``."""
        ctx = self.field
        return ctx.inv(ctx.mul(self.a, self.b))

    @property
    def h(self) -> int:
        """``(q + 1)(1 - u) - (q mu + nu) / xi``.

        Raises:
            ValueError: If ``xi`` does not divide ``q mu + nu``.
        """
        q, xi = self.params.q, self.params.xi
        total = q * self.mu + self.nu
        if total % xi:
            raise ValueError(f"xi={xi} does not divide q mu + nu = {total}")
        return (q + 1) * (1 - self.u) - total // xi

    def gamma_compatible(self) -> bool:
        """The binomial congruences under which ``Gamma`` acts by ``t/[gamma]``."""
        return _slope_congruence(self.params, self.mu, self.n_x) and (
            _slope_congruence(self.params, self.nu, self.n_y)
        )


def _slope_congruence(params: PrimeParams, slope: int, n: int) -> bool:
    p, q, xi = params.p, params.q, params.xi
    if slope <= xi:
        top, limit = xi - slope, q - slope
    else:
        top, limit = slope - xi, slope + 2 - q
    return all(
        binomial_mod_p(top, m, p) == 0 for m in range(1, limit) if m * xi < n
    )


type Presentation = (
    ReduciblePresentation
    | ZeroPresentation
    | RankOnePresentation
    | IrreduciblePresentation
)


# ---------------------------------------------------------------------------
# Constructors with defaults
# ---------------------------------------------------------------------------


def reducible_presentation(
    params: PrimeParams,
    ell: int,
    u: int,
    alpha: FieldElem = 1,
    beta: FieldElem = 1,
    b: Mapping[int, FieldElem] | None = None,
    c_e: Mapping[int, FieldElem] | None = None,
    c: FieldElem = 0,
    N: int | None = None,
    n_x: int | None = None,
    n_y: int | None = None,
) -> ReduciblePresentation:
    """Build a reducible presentation, filling in minimal auxiliary data.

    ``N`` defaults to the least value with non-negative exponents, ``n_y`` to
    ``1`` and ``n_x`` to the least value meeting the inequalities.

    Raises:
        InfeasiblePresentationError: If the inequalities cannot be met.
        ValueError: On out-of-range arguments.
    """
    ctx = coefficient_field(params)
    b_t = make_coeffs(ctx, b, "b")
    c_t = make_coeffs(ctx, c_e, "c")
    d_set = tuple(i for i, _ in b_t)
    e_set = tuple(i for i, _ in c_t)
    if N is None:
        N = minimal_n(params, ell, d_set, e_set) if 0 < ell < params.xi else 1
    n_y = 1 if n_y is None else n_y
    if n_x is None:
        n_x = least_n_x(params, ell, d_set, e_set, bool(c), n_y)
    pres = ReduciblePresentation(
        params, ell, u % params.xi, alpha, beta, b_t, c_t, c, N, n_x, n_y
    )
    logger.debug("reducible presentation ell={} N={} n_x={}", ell, N, n_x)
    return pres


def zero_presentation(
    params: PrimeParams,
    u: int,
    alpha: FieldElem = 1,
    beta: FieldElem = 1,
    d: Mapping[int, FieldElem] | None = None,
    e: FieldElem = 0,
    N: int | None = None,
    n_x: int | None = None,
) -> ZeroPresentation:
    """Build an ``ell = 0`` presentation with minimal ``N`` and ``n_x``."""
    p, q, xi = params.p, params.q, params.xi
    d_t = make_coeffs(coefficient_field(params), d, "d")
    top = max((p**i * xi for i, _ in d_t), default=0)
    if N is None:
        N = 1
        while q**N < top + 1:
            N += 1
    if n_x is None:
        n_x = 1 + max(0, _ceil_div(top - 1, q))
    return ZeroPresentation(params, u % xi, alpha, beta, d_t, e, N, n_x)


def irreducible_presentation(
    params: PrimeParams,
    nu: int,
    mu: int,
    u: int,
    a: FieldElem = 1,
    b: FieldElem = 1,
    n_x: int | None = None,
    n_y: int | None = None,
) -> IrreduciblePresentation:
    """Build an irreducible presentation; ``n_x = n_y`` minimal by default."""
    n = max(_ceil_div(nu, params.q - 1), _ceil_div(mu, params.q - 1), 1)
    return IrreduciblePresentation(
        params,
        a,
        b,
        nu,
        mu,
        u % params.xi,
        n if n_x is None else n_x,
        n if n_y is None else n_y,
    )


# ---------------------------------------------------------------------------
# phi-matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiMatrix:
    """``phi(lambda_g) = sum_h rows[g][h] lambda_h`` on the dual basis.

    Attributes:
        field: The coefficient field.
        basis: Generator labels, ``("x", "y")`` or ``("z",)``.
        rows: Non-zero entries by source and target label.
        gamma_character: ``e_g`` with ``gamma * lambda_g = a^(e_g) lambda_g``
            for ``[gamma] = a t``.
    """

    field: FieldContext
    basis: tuple[str, ...]
    rows: dict[str, dict[str, LaurentPoly]]
    gamma_character: dict[str, int]

    @classmethod
    def build(
        cls,
        ctx: FieldContext,
        basis: tuple[str, ...],
        entries: Mapping[tuple[str, str], LaurentPoly],
        gamma_character: Mapping[str, int],
    ) -> PhiMatrix:
        """Assemble a matrix, dropping zero entries."""
        rows: dict[str, dict[str, LaurentPoly]] = {g: {} for g in basis}
        for (src, dst), poly in entries.items():
            if not poly.is_zero():
                rows[src][dst] = poly
        return cls(ctx, basis, rows, dict(gamma_character))

    def entry(self, source: str, target: str) -> LaurentPoly:
        """The coefficient of ``lambda_target`` in ``phi(lambda_source)``."""
        return self.rows[source].get(target, LaurentPoly.zero(self.field))

    def determinant(self) -> LaurentPoly:
        if len(self.basis) == 1:
            (g,) = self.basis
            return self.entry(g, g)
        x, y = self.basis
        return self.entry(x, x) * self.entry(y, y) - self.entry(x, y) * self.entry(y, x)

    def is_etale(self) -> bool:
        """True when the determinant is a unit Laurent monomial."""
        return self.determinant().is_monomial()

    def window(self, lo: int, hi: int) -> PhiMatrix:
        """Entries restricted to exponents in ``[lo, hi]``."""
        entries = {
            (src, dst): LaurentPoly.make(
                self.field, {d: c for d, c in poly.coeffs.items() if lo <= d <= hi}
            )
            for src, row in self.rows.items()
            for dst, poly in row.items()
        }
        return PhiMatrix.build(self.field, self.basis, entries, self.gamma_character)

    def exponent_range(self) -> tuple[int, int]:
        """Least and largest exponent occurring; ``(0, 0)`` if all are empty."""
        degrees = [
            d
            for row in self.rows.values()
            for poly in row.values()
            for d in poly.coeffs
        ]
        return (min(degrees), max(degrees)) if degrees else (0, 0)

    def as_json(self) -> dict[str, object]:
        return {
            "basis": list(self.basis),
            "phi": {
                src: {dst: poly.as_json() for dst, poly in sorted(row.items())}
                for src, row in self.rows.items()
            },
            "gamma": dict(sorted(self.gamma_character.items())),
        }


def _cyclotomic_poly(pres: ReduciblePresentation) -> LaurentPoly:
    ctx, system = pres.field, pres.system
    out = LaurentPoly.zero(ctx)
    for o in system.o:
        out = out + LaurentPoly.monomial(ctx, system.shifted(o), pres.c)
    return out


def reducible_offdiagonal(pres: ReduciblePresentation) -> LaurentPoly:
    """``t^(1-q^N) P(t)``, the coefficient of ``lambda_x`` in ``phi(lambda_y)``."""
    ctx, system = pres.field, pres.system
    out = LaurentPoly.zero(ctx)
    for i, bi in pres.b:
        out = out + LaurentPoly.monomial(ctx, system.shifted(system.r_d[i]), bi)
    if pres.c:
        out = out + _cyclotomic_poly(pres)
    digits = digits_of(pres.params, pres.ell)
    for i, ci in pres.c_e:
        n0, *rest = system.n_e[i]
        weight = ctx.neg(ctx.mul(ci, ctx.from_int(digits.m_at(i) + 2)))
        out = out + LaurentPoly.monomial(ctx, system.shifted(n0), ci)
        for nj in rest:
            out = out + LaurentPoly.monomial(ctx, system.shifted(nj), weight)
    return out


def phi_matrix(pres: Presentation) -> PhiMatrix:
    """The exact matrix of ``phi`` on ``lambda_x, lambda_y`` (or ``lambda``)."""
    ctx = pres.field
    mono = LaurentPoly.monomial
    match pres:
        case ReduciblePresentation():
            entries = {
                ("x", "x"): mono(ctx, 0, ctx.inv(pres.alpha)),
                ("y", "y"): mono(ctx, 0, ctx.inv(pres.beta)),
                ("y", "x"): reducible_offdiagonal(pres),
            }
            gamma = {"x": -pres.u, "y": pres.ell - pres.u}
            return PhiMatrix.build(ctx, ("x", "y"), entries, gamma)
        case ZeroPresentation():
            p, xi = pres.params.p, pres.params.xi
            gap = ctx.sub(pres.beta, pres.alpha)
            off = mono(ctx, 0, pres.e)
            for i, di in pres.d:
                off = off + mono(ctx, -(p**i) * xi, ctx.mul(di, gap))
            entries = {
                ("x", "x"): mono(ctx, 0, ctx.inv(pres.alpha)),
                ("y", "y"): mono(ctx, 0, ctx.inv(pres.beta)),
                ("y", "x"): -off,
            }
            gamma = {"x": -pres.u, "y": -pres.u}
            return PhiMatrix.build(ctx, ("x", "y"), entries, gamma)
        case RankOnePresentation():
            entries = {("z", "z"): mono(ctx, 0, ctx.inv(pres.eta))}
            return PhiMatrix.build(ctx, ("z",), entries, {"z": -pres.w})
        case IrreduciblePresentation():
            xi = pres.params.xi
            entries = {
                ("y", "x"): mono(ctx, pres.mu - xi, ctx.inv(pres.b)),
                ("x", "y"): mono(ctx, pres.nu - xi, ctx.inv(pres.a)),
            }
            gamma = {"x": -pres.u, "y": -pres.u}
            return PhiMatrix.build(ctx, ("x", "y"), entries, gamma)


# ---------------------------------------------------------------------------
# Canonical forms and classification
# ---------------------------------------------------------------------------


def _ratio_power(
    ctx: FieldContext, alpha: FieldElem, beta: FieldElem, m: int
) -> FieldElem:
    return ctx.pow(ctx.div(alpha, beta), m)


def canonical_coefficients(
    pres: ReduciblePresentation,
) -> tuple[dict[int, FieldElem], dict[int, FieldElem]]:
    """Fold ``b`` and ``c_e`` onto ``D(ell)`` and ``E(ell)``.

    ``b_i'`` moves to ``i_D(i')`` with weight ``(alpha / beta)^(m_D(i'))``,
    landing in the ``c``-part when ``i_D(i')`` lies in ``E(ell)``; ``c_i'``
    moves to ``Pi(i')`` with weight ``(alpha / beta)^(i' // f)`` and is
    dropped when ``Pi(i')`` lies outside ``E(ell)``.
    """
    params, ctx = pres.params, pres.field
    D, E = de_split(params, pres.ell)
    b_out: dict[int, FieldElem] = {i: 0 for i in D.members}
    c_out: dict[int, FieldElem] = {i: 0 for i in E.members}
    for i_prime, bi in pres.b:
        target = i_d(params, pres.ell, i_prime)
        m = m_d(params, pres.ell, i_prime)
        weight = _ratio_power(ctx, pres.alpha, pres.beta, m)
        bucket = b_out if target in b_out else c_out
        bucket[target] = ctx.add(bucket[target], ctx.mul(weight, bi))
    for i_prime, ci in pres.c_e:
        target = i_prime % params.f
        if target not in c_out:
            continue
        weight = _ratio_power(ctx, pres.alpha, pres.beta, i_prime // params.f)
        c_out[target] = ctx.add(c_out[target], ctx.mul(weight, ci))
    return b_out, c_out


def canonical_d(pres: ZeroPresentation) -> dict[int, FieldElem]:
    """``d_i = sum_{Pi(i') = i} (alpha / beta)^((i' - Pi(i')) / f) d_i'``."""
    params, ctx = pres.params, pres.field
    out: dict[int, FieldElem] = {i: 0 for i in range(params.f)}
    for i_prime, di in pres.d:
        target = i_prime % params.f
        weight = _ratio_power(ctx, pres.alpha, pres.beta, i_prime // params.f)
        out[target] = ctx.add(out[target], ctx.mul(weight, di))
    return out


def canonicalize(pres: Presentation) -> Presentation:
    """The isomorphic presentation indexed by ``D(ell)`` and ``E(ell)`` (resp. ``F``).

    Rank-one and irreducible presentations are returned unchanged.
    """
    match pres:
        case ReduciblePresentation():
            b_out, c_out = canonical_coefficients(pres)
            return reducible_presentation(
                pres.params,
                pres.ell,
                pres.u,
                pres.alpha,
                pres.beta,
                b=b_out,
                c_e=c_out,
                c=pres.c,
                n_y=pres.n_y,
            )
        case ZeroPresentation():
            return zero_presentation(
                pres.params,
                pres.u,
                pres.alpha,
                pres.beta,
                d=canonical_d(pres),
                e=pres.e,
            )
        case _:
            return pres


def _class_vector(pres: ReduciblePresentation | ZeroPresentation) -> list[FieldElem]:
    match pres:
        case ReduciblePresentation():
            b_out, c_out = canonical_coefficients(pres)
            return [
                *(v for _, v in sorted(b_out.items())),
                *(v for _, v in sorted(c_out.items())),
                pres.c,
            ]
        case ZeroPresentation():
            out = [v for _, v in sorted(canonical_d(pres).items())]
            if pres.alpha == pres.beta:
                out.append(pres.e)
            return out


def _proportional(ctx: FieldContext, v1: list[FieldElem], v2: list[FieldElem]) -> bool:
    """True when ``v2 = eps v1`` for a single unit ``eps``."""
    pivot = next((k for k, a in enumerate(v1) if a), None)
    if pivot is None:
        return not any(v2)
    if v2[pivot] == 0:
        return False
    eps = ctx.div(v2[pivot], v1[pivot])
    return all(ctx.mul(eps, a) == b for a, b in zip(v1, v2, strict=True))


def equivalent(p1: Presentation, p2: Presentation) -> bool:
    """Decide whether two presentations define isomorphic modules.

    Raises:
        ValueError: If the kinds or the invariants ``(ell, u, alpha, beta)``
            differ; such presentations are never compared.
    """
    if p1.kind is not p2.kind or p1.params != p2.params:
        raise ValueError(f"cannot compare {p1.kind} with {p2.kind}")
    ctx = p1.field
    match p1, p2:
        case (ReduciblePresentation(), ReduciblePresentation()) | (
            ZeroPresentation(),
            ZeroPresentation(),
        ):
            key1 = (p1.ell, p1.u, p1.alpha, p1.beta)
            key2 = (p2.ell, p2.u, p2.alpha, p2.beta)
            if key1 != key2:
                raise ValueError(f"invariants differ: {key1} vs {key2}")
            return _proportional(ctx, _class_vector(p1), _class_vector(p2))
        case RankOnePresentation(), RankOnePresentation():
            xi = p1.params.xi
            return p1.eta == p2.eta and (p1.w - p2.w) % xi == 0
        case IrreduciblePresentation(), IrreduciblePresentation():
            return p1.alpha == p2.alpha and stratum_of(p1) == stratum_of(p2)
        case _:
            raise ValueError(f"cannot compare {p1.kind} with {p2.kind}")


def support(pres: ReduciblePresentation | ZeroPresentation) -> FSubset:
    """Indices in ``F`` carrying a non-zero canonical coefficient."""
    f = pres.params.f
    match pres:
        case ReduciblePresentation():
            b_out, c_out = canonical_coefficients(pres)
            members = [i for i, v in (b_out | c_out).items() if v]
        case ZeroPresentation():
            if pres.alpha == pres.beta:
                members = []
            else:
                members = [i for i, v in canonical_d(pres).items() if v]
    return FSubset.of(f, members)


def stratum_of(pres: Presentation) -> StratumE:
    """The stratum of a rank-two presentation.

    Reducible presentations map to ``(ell, u, support)``. An irreducible
    presentation maps to ``[h]``; when ``q + 1`` divides ``h`` and
    ``alpha`` is a square the module splits as two twists of
    ``omega^(h / (q + 1))`` and maps to ``(0, -h / (q + 1), {})``.

    Raises:
        ValueError: For rank-one input, or ``(q + 1) | h`` with non-square
            ``alpha``.
    """
    params = pres.params
    match pres:
        case ReduciblePresentation() | ZeroPresentation():
            return reducible(params, pres.ell, pres.u, support(pres))
        case IrreduciblePresentation():
            h, q = pres.h, params.q
            if h % (q + 1):
                return irreducible(params, h)
            if not pres.field.is_square(pres.alpha):
                raise ValueError(f"h={h} is divisible by q + 1 and alpha is no square")
            return reducible(params, 0, -(h // (q + 1)), FSubset.empty(params.f))
        case RankOnePresentation():
            raise ValueError("rank-one presentations carry no stratum")


def presentation_from_stratum(
    params: PrimeParams, stratum: StratumE
) -> ReduciblePresentation | ZeroPresentation | IrreduciblePresentation:
    """A presentation whose :func:`stratum_of` is ``stratum``.

    Reducible strata get unit coefficients on ``I``; ``ell = 0`` uses
    ``alpha = 1`` and ``beta`` the field generator so the ``d``-terms
    survive. ``[h]`` is realized with ``u = 0`` and slopes ``nu = xi s1``,
    ``mu = xi s2`` where ``q s2 + s1`` is the lift of ``q + 1 - h`` to
    ``[q + 1, q^2 + q]``.
    """
    q, xi = params.q, params.xi
    match stratum:
        case ReducibleStratum(ell, u, iset):
            ones = {i: 1 for i in iset}
            if ell == 0:
                ctx = coefficient_field(params)
                return zero_presentation(params, u, 1, ctx.generator, d=ones)
            D, E = de_split(params, ell)
            b = {i: 1 for i in iset if i in D}
            c_e = {i: 1 for i in iset if i in E}
            return reducible_presentation(params, ell, u, b=b, c_e=c_e)
        case IrreducibleStratum(h):
            r = (q + 1 - h) % (q * q - 1)
            if r < q + 1:
                r += q * q - 1
            s2, s1 = divmod(r - 1, q)
            return irreducible_presentation(params, xi * (s1 + 1), xi * s2, 0)


# ---------------------------------------------------------------------------
# JSON and sampling
# ---------------------------------------------------------------------------


def _coeffs_json(coeffs: Coeffs) -> dict[str, int]:
    return {str(i): c for i, c in coeffs}


def presentation_to_json(pres: Presentation) -> dict[str, object]:
    match pres:
        case ReduciblePresentation():
            return {
                "kind": str(pres.kind),
                "ell": pres.ell,
                "u": pres.u,
                "alpha": pres.alpha,
                "beta": pres.beta,
                "b": _coeffs_json(pres.b),
                "c_e": _coeffs_json(pres.c_e),
                "c": pres.c,
                "N": pres.N,
                "n_x": pres.n_x,
                "n_y": pres.n_y,
            }
        case ZeroPresentation():
            return {
                "kind": str(pres.kind),
                "u": pres.u,
                "alpha": pres.alpha,
                "beta": pres.beta,
                "d": _coeffs_json(pres.d),
                "e": pres.e,
                "N": pres.N,
                "n_x": pres.n_x,
            }
        case RankOnePresentation():
            return {"kind": str(pres.kind), "eta": pres.eta, "w": pres.w, "N": pres.N}
        case IrreduciblePresentation():
            return {
                "kind": str(pres.kind),
                "a": pres.a,
                "b": pres.b,
                "nu": pres.nu,
                "mu": pres.mu,
                "u": pres.u,
                "n_x": pres.n_x,
                "n_y": pres.n_y,
            }


def _int_field(data: Mapping[str, object], key: str, default: int | None = None) -> int:
    value = data.get(key, default)
    if not isinstance(value, int):
        raise ValueError(f"field {key!r} must be an integer, got {value!r}")
    return value


def _opt_int(data: Mapping[str, object], key: str) -> int | None:
    return None if data.get(key) is None else _int_field(data, key)


def _coeff_map(data: Mapping[str, object], key: str) -> dict[int, int]:
    raw = data.get(key, {})
    if not isinstance(raw, Mapping):
        raise ValueError(f"field {key!r} must map indices to coefficients")
    out: dict[int, int] = {}
    for k, v in raw.items():
        if not isinstance(v, int):
            raise ValueError(f"coefficient {key}[{k}] must be an integer")
        out[int(str(k))] = v
    return out


def presentation_from_json(
    params: PrimeParams, data: Mapping[str, object]
) -> Presentation:
    """Parse the output of :func:`presentation_to_json`; omitted auxiliaries default.

    Raises:
        ValueError: On an unknown kind or malformed fields.
        InfeasiblePresentationError: If the data violate the inequalities.
    """
    kind = data.get("kind")
    if kind == PresentationKind.REDUCIBLE:
        return reducible_presentation(
            params,
            _int_field(data, "ell"),
            _int_field(data, "u", 0),
            _int_field(data, "alpha", 1),
            _int_field(data, "beta", 1),
            b=_coeff_map(data, "b"),
            c_e=_coeff_map(data, "c_e"),
            c=_int_field(data, "c", 0),
            N=_opt_int(data, "N"),
            n_x=_opt_int(data, "n_x"),
            n_y=_opt_int(data, "n_y"),
        )
    if kind == PresentationKind.ZERO:
        return zero_presentation(
            params,
            _int_field(data, "u", 0),
            _int_field(data, "alpha", 1),
            _int_field(data, "beta", 1),
            d=_coeff_map(data, "d"),
            e=_int_field(data, "e", 0),
            N=_opt_int(data, "N"),
            n_x=_opt_int(data, "n_x"),
        )
    if kind == PresentationKind.RANK_ONE:
        return RankOnePresentation(
            params,
            _int_field(data, "eta"),
            _int_field(data, "w"),
            _int_field(data, "N", 1),
        )
    if kind == PresentationKind.IRREDUCIBLE:
        return irreducible_presentation(
            params,
            _int_field(data, "nu"),
            _int_field(data, "mu"),
            _int_field(data, "u", 0),
            _int_field(data, "a", 1),
            _int_field(data, "b", 1),
            n_x=_opt_int(data, "n_x"),
            n_y=_opt_int(data, "n_y"),
        )
    raise ValueError(f"unknown presentation kind {kind!r}")


def sample_presentations(
    params: PrimeParams, count: int, rng_seed: int | None = 0
) -> Iterator[ReduciblePresentation | ZeroPresentation]:
    """Draw feasible canonical presentations with random coefficients.

    Exponents ``ell`` cycle through ``[0, q - 2]``; coefficients, ``u`` and
    the eigenvalues are drawn with ``numpy.random.default_rng(rng_seed)``.
    ``c`` is set only at the cyclotomic exponent with ``alpha = beta``.
    """
    rng = np.random.default_rng(rng_seed)
    ctx = coefficient_field(params)
    xi, cyc = params.xi, cyclotomic_point(params)

    def unit() -> int:
        return int(rng.integers(1, ctx.size))

    def coeff() -> int:
        return int(rng.integers(0, ctx.size))

    for k in range(count):
        ell = k % xi
        u = int(rng.integers(0, xi))
        alpha, beta = unit(), unit()
        if ell == 0:
            d = {i: coeff() for i in range(params.f)}
            yield zero_presentation(params, u, alpha, beta, d=d, e=coeff())
            continue
        D, E = de_split(params, ell)
        c = 0
        if ell == cyc and rng.integers(0, 2):
            beta, c = alpha, unit()
        yield reducible_presentation(
            params,
            ell,
            u,
            alpha,
            beta,
            b={i: coeff() for i in D},
            c_e={i: coeff() for i in E},
            c=c,
        )
