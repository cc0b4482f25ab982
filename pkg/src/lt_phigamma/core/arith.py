"""Exact coefficient arithmetic.

Finite fields ``k = F_{p^{fe}}`` with table-driven arithmetic, the truncated
unramified ring ``O_F / p^K`` with per-element precision tracking, truncated
power series over ``k`` and exact Laurent polynomials over ``k``.

Field elements are plain ``int`` values encoding the coefficient vector of a
polynomial in the fixed generator: digit ``j`` in base ``p`` is the coefficient
of ``x^j``. ``0`` and ``1`` are the additive and multiplicative identities.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import NDArray
from sympy import factorint, isprime
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p

from lt_phigamma.core.errors import PrecisionError

type FieldElem = int

# Largest field whose addition and multiplication tables are materialized.
_MAX_FIELD_SIZE = 1024


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class PrimeParams:
    """The residue data ``(p, f, e)`` of an unramified extension ``F / Q_p``.

    Attributes:
        p: An odd prime.
        f: The residue degree of ``F``; ``q = p^f``.
        e: The degree of the coefficient field ``k`` over ``F_q``.

    Raises:
        ValueError: If ``p`` is not an odd prime, or ``f``/``e`` out of range.
    """

    p: int
    f: int
    e: int = 1

    def __post_init__(self) -> None:
        if self.p < 3 or not isprime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if not 1 <= self.f <= 16:
            raise ValueError(f"f must lie in [1, 16], got {self.f}")
        if self.e < 1:
            raise ValueError(f"e must be positive, got {self.e}")

    @property
    def q(self) -> int:
        """The cardinality of the residue field of ``F``."""
        return self.p**self.f

    @property
    def xi(self) -> int:
        """``q - 1``."""
        return self.q - 1


# ---------------------------------------------------------------------------
# Polynomial helpers over Z (coefficient tuples, low degree first)
# ---------------------------------------------------------------------------


def _int_to_digits(value: int, p: int, length: int) -> list[int]:
    digits: list[int] = []
    for _ in range(length):
        value, r = divmod(value, p)
        digits.append(r)
    return digits


def _digits_to_int(digits: Iterable[int], p: int) -> int:
    value = 0
    for d in reversed(list(digits)):
        value = value * p + d
    return value


def _poly_mulmod(
    a: list[int], b: list[int], modulus: tuple[int, ...], n: int
) -> list[int]:
    """Multiply two coefficient lists modulo a monic ``modulus`` and ``n``."""
    d = len(modulus) - 1
    prod = [0] * (2 * d - 1 if d > 0 else 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj:
                prod[i + j] += ai * bj
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k] % n
        if c:
            for j in range(d):
                prod[k - d + j] -= c * modulus[j]
        prod[k] = 0
    return [c % n for c in prod[:d]] if d > 0 else [0]


@lru_cache(maxsize=64)
def least_irreducible(p: int, degree: int) -> tuple[int, ...]:
    """Return the least monic irreducible polynomial of ``degree`` over ``F_p``.

    Polynomials are ordered lexicographically by their coefficient list from
    the leading coefficient down. The degree-one answer is ``x``.

    Args:
        p: A prime.
        degree: A positive degree.

    Returns:
        The coefficients, lowest degree first, including the leading ``1``.

    Raises:
        ValueError: If ``p`` is composite or ``degree < 1``.
        RuntimeError: If no irreducible polynomial is found.
    """
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if degree < 1:
        raise ValueError(f"degree must be positive, got {degree}")
    for tail in itertools.product(range(p), repeat=degree):
        high_first = [1, *tail]
        if gf_irreducible_p(high_first, p, ZZ):
            return tuple(reversed(high_first))
    raise RuntimeError(f"no irreducible polynomial of degree {degree} over F_{p}")


# ---------------------------------------------------------------------------
# Finite fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FieldContext:
    """The finite field ``F_p[x] / (modulus)`` with materialized tables.

    Contexts are built by :func:`field_make` and cached, so identity
    comparison is equality.

    Attributes:
        p: The characteristic.
        degree: The degree over ``F_p``.
        modulus: The monic modulus, lowest degree first.
    """

    p: int
    degree: int
    modulus: tuple[int, ...]
    add_table: NDArray[np.int32] = field(repr=False)
    mul_table: NDArray[np.int32] = field(repr=False)

    @property
    def size(self) -> int:
        """The number of field elements."""
        return self.p**self.degree

    @cached_property
    def neg_table(self) -> NDArray[np.int32]:
        """Additive inverses, indexed by element."""
        return np.argmin(self.add_table, axis=1).astype(np.int32)

    @cached_property
    def inv_table(self) -> NDArray[np.int32]:
        """Multiplicative inverses, indexed by element (``inv[0] = 0``)."""
        inv = np.argmax(self.mul_table == 1, axis=1).astype(np.int32)
        inv[0] = 0
        return inv

    @cached_property
    def generator(self) -> FieldElem:
        """The least primitive element of the multiplicative group."""
        order = self.size - 1
        primes = list(factorint(order)) if order > 1 else []
        for g in range(1, self.size):
            if all(self.pow(g, order // r) != 1 for r in primes):
                return g
        raise RuntimeError("multiplicative group has no generator")

    def add(self, a: FieldElem, b: FieldElem) -> FieldElem:
        """Return ``a + b``."""
        return int(self.add_table[a, b])

    def sub(self, a: FieldElem, b: FieldElem) -> FieldElem:
        """Return ``a - b``."""
        return int(self.add_table[a, self.neg_table[b]])

    def neg(self, a: FieldElem) -> FieldElem:
        """Return ``-a``."""
        return int(self.neg_table[a])

    def mul(self, a: FieldElem, b: FieldElem) -> FieldElem:
        """Return ``a * b``."""
        return int(self.mul_table[a, b])

    def inv(self, a: FieldElem) -> FieldElem:
        """Return ``a^{-1}``.

        Raises:
            ZeroDivisionError: If ``a`` is zero.
        """
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return int(self.inv_table[a])

    def div(self, a: FieldElem, b: FieldElem) -> FieldElem:
        """Return ``a / b``."""
        return self.mul(a, self.inv(b))

    def pow(self, a: FieldElem, n: int) -> FieldElem:
        """Return ``a^n``; negative ``n`` requires ``a`` to be a unit."""
        if n < 0:
            return self.pow(self.inv(a), -n)
        result, base = 1, a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def from_int(self, n: int) -> FieldElem:
        """Embed the integer ``n`` via ``Z -> F_p``."""
        return n % self.p

    def scalar(self, n: int, a: FieldElem) -> FieldElem:
        """Return ``n * a`` for an integer ``n``."""
        return self.mul(self.from_int(n), a)

    def elements(self) -> range:
        """All field elements."""
        return range(self.size)

    def units(self) -> range:
        """All non-zero field elements."""
        return range(1, self.size)

    def is_square(self, a: FieldElem) -> bool:
        """Return True if ``a`` is a square in the field."""
        if a == 0:
            return True
        return self.pow(a, (self.size - 1) // 2) == 1

    def sqrt(self, a: FieldElem) -> FieldElem:
        """Return some square root of ``a``.

        Raises:
            ValueError: If ``a`` is not a square.
        """
        for b in self.elements():
            if self.mul(b, b) == a:
                return b
        raise ValueError(f"{a} is not a square")

    def non_square(self) -> FieldElem | None:
        """Return the least non-square, or None if every element is a square."""
        for a in self.units():
            if not self.is_square(a):
                return a
        return None

    def embed(self, sub: FieldContext, a: FieldElem) -> FieldElem:
        """Map an element of the subfield ``sub`` into this field.

        The embedding sends the generator of ``sub`` to the least root of
        ``sub.modulus`` in this field.

        Raises:
            ValueError: If ``sub`` does not embed.
        """
        if sub is self:
            return a
        root = self._root_of(sub.modulus)
        value, power = 0, 1
        for d in _int_to_digits(a, sub.p, sub.degree):
            value = self.add(value, self.scalar(d, power))
            power = self.mul(power, root)
        return value

    def _root_of(self, poly: tuple[int, ...]) -> FieldElem:
        for z in self.elements():
            acc = 0
            for c in reversed(poly):
                acc = self.add(self.mul(acc, z), self.from_int(c))
            if acc == 0:
                return z
        raise ValueError(f"{poly} has no root in F_{self.p}^{self.degree}")


@lru_cache(maxsize=32)
def field_make(p: int, f: int, e: int = 1) -> FieldContext:
    """Build the field ``F_{p^{fe}}`` with its canonical modulus.

    Args:
        p: An odd prime.
        f: The residue degree.
        e: The extension degree over ``F_{p^f}``.

    Returns:
        A cached :class:`FieldContext`.

    Raises:
        ValueError: If ``p`` is composite, ``f * e < 1``, or the field is
            too large to tabulate.
    """
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    degree = f * e
    if degree < 1:
        raise ValueError("f * e must be at least 1")
    size = p**degree
    if size > _MAX_FIELD_SIZE:
        raise ValueError(f"field of size {size} exceeds {_MAX_FIELD_SIZE}")
    modulus = least_irreducible(p, degree)
    digits = [_int_to_digits(a, p, degree) for a in range(size)]
    digit_array = np.array(digits, dtype=np.int64).reshape(size, degree)
    summed = (digit_array[:, None, :] + digit_array[None, :, :]) % p
    weights = p ** np.arange(degree, dtype=np.int64)
    add_table = (summed * weights).sum(axis=2).astype(np.int32)
    mul_table = np.zeros((size, size), dtype=np.int32)
    for a in range(1, size):
        for b in range(a, size):
            c = _digits_to_int(_poly_mulmod(digits[a], digits[b], modulus, p), p)
            mul_table[a, b] = mul_table[b, a] = c
    return FieldContext(p, degree, modulus, add_table, mul_table)


def solve_linear(
    ctx: FieldContext, rows: list[NDArray[np.int32]], rhs: list[FieldElem]
) -> tuple[dict[int, FieldElem], frozenset[int], bool]:
    """Solve a linear system over ``ctx`` by Gaussian elimination.

    Args:
        ctx: The coefficient field.
        rows: Dense coefficient rows, all of the same length.
        rhs: Right-hand sides, one per row.

    Returns:
        ``(values, undetermined, consistent)``: the uniquely determined
        unknowns with their values, the unknowns left undetermined, and
        whether the system is consistent.
    """
    if not rows:
        return {}, frozenset(), True
    width = len(rows[0])
    matrix = np.zeros((len(rows), width + 1), dtype=np.int32)
    for r, (row, b) in enumerate(zip(rows, rhs, strict=True)):
        matrix[r, :width] = row
        matrix[r, width] = b
    pivots: list[int] = []
    rank = 0
    for col in range(width):
        nz = np.nonzero(matrix[rank:, col])[0]
        if nz.size == 0:
            continue
        pivot = rank + int(nz[0])
        if pivot != rank:
            matrix[[rank, pivot]] = matrix[[pivot, rank]]
        matrix[rank] = ctx.mul_table[ctx.inv_table[matrix[rank, col]], matrix[rank]]
        for r in np.nonzero(matrix[:, col])[0]:
            if r == rank:
                continue
            factor = ctx.neg_table[matrix[r, col]]
            matrix[r] = ctx.add_table[matrix[r], ctx.mul_table[factor, matrix[rank]]]
        pivots.append(col)
        rank += 1
        if rank == len(rows):
            break
    consistent = not np.any(matrix[rank:, width])
    free = set(range(width)) - set(pivots)
    values: dict[int, FieldElem] = {}
    for r, col in enumerate(pivots):
        if not any(matrix[r, c] for c in free):
            values[col] = int(matrix[r, width])
    undetermined = frozenset(range(width)) - frozenset(values)
    return values, undetermined, consistent


# ---------------------------------------------------------------------------
# Truncated unramified ring O_F / p^K
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WittElem:
    """An element of ``O_F / p^K`` known modulo ``p^prec``.

    Attributes:
        coeffs: Coefficients in ``[0, p^K)`` of ``1, theta, ..., theta^{f-1}``.
        prec: Number of guaranteed-correct p-adic digits.
    """

    coeffs: tuple[int, ...]
    prec: int

    def __post_init__(self) -> None:
        if self.prec < 0:
            raise ValueError(f"precision must be non-negative, got {self.prec}")


@dataclass(frozen=True, eq=False)
class WittRing:
    """The ring ``O_F / p^K`` presented as ``(Z / p^K)[theta] / (lifted modulus)``.

    Attributes:
        params: The residue data of ``F``.
        K: The working precision.
    """

    params: PrimeParams
    K: int

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")

    @cached_property
    def modulus(self) -> tuple[int, ...]:
        """The integer lift of the canonical degree-``f`` field modulus."""
        return least_irreducible(self.params.p, self.params.f)

    @cached_property
    def residue_field(self) -> FieldContext:
        """The residue field ``F_q``."""
        return field_make(self.params.p, self.params.f)

    @property
    def pk(self) -> int:
        """``p^K``."""
        return self.params.p**self.K

    # -- raw representative arithmetic ------------------------------------

    def raw_add(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        """Add two representatives modulo ``p^K``."""
        n = self.pk
        return tuple((x + y) % n for x, y in zip(a, b, strict=True))

    def raw_sub(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        """Subtract two representatives modulo ``p^K``."""
        n = self.pk
        return tuple((x - y) % n for x, y in zip(a, b, strict=True))

    def raw_mul(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        """Multiply two representatives modulo ``p^K`` and the modulus."""
        if self.params.f == 1:
            return ((a[0] * b[0]) % self.pk,)
        return tuple(_poly_mulmod(list(a), list(b), self.modulus, self.pk))

    def raw_scale(self, a: tuple[int, ...], n: int) -> tuple[int, ...]:
        """Multiply a representative by the integer ``n``."""
        m = self.pk
        return tuple((x * n) % m for x in a)

    def raw_zero(self) -> tuple[int, ...]:
        """The zero representative."""
        return (0,) * self.params.f

    def raw_int(self, n: int) -> tuple[int, ...]:
        """The representative of the integer ``n``."""
        return (n % self.pk,) + (0,) * (self.params.f - 1)

    def raw_pow(self, a: tuple[int, ...], n: int) -> tuple[int, ...]:
        """Raise a representative to a non-negative power."""
        result, base = self.raw_int(1), a
        while n:
            if n & 1:
                result = self.raw_mul(result, base)
            base = self.raw_mul(base, base)
            n >>= 1
        return result

    def raw_inv(self, a: tuple[int, ...]) -> tuple[int, ...]:
        """Invert a unit representative by Newton iteration.

        Raises:
            ZeroDivisionError: If ``a`` is not a unit.
        """
        res = self.residue_field
        abar = _digits_to_int((c % self.params.p for c in a), self.params.p)
        inv_bar = res.inv(abar)
        x = tuple(_int_to_digits(inv_bar, self.params.p, self.params.f))
        two = self.raw_int(2)
        correct = 1
        while correct < self.K:
            x = self.raw_mul(x, self.raw_sub(two, self.raw_mul(a, x)))
            correct *= 2
        return x

    # -- precision-tracked elements ---------------------------------------

    def make(self, coeffs: Iterable[int], prec: int | None = None) -> WittElem:
        """Build an element from raw coefficients (default precision ``K``)."""
        c = tuple(x % self.pk for x in coeffs)
        if len(c) != self.params.f:
            raise ValueError(f"expected {self.params.f} coefficients, got {len(c)}")
        return WittElem(c, self.K if prec is None else min(prec, self.K))

    def from_int(self, n: int) -> WittElem:
        """Embed an integer exactly."""
        return WittElem(self.raw_int(n), self.K)

    def from_residue(self, a: FieldElem) -> WittElem:
        """The digit-wise lift of a residue field element."""
        return self.make(_int_to_digits(a, self.params.p, self.params.f))

    def teichmuller(self, a: FieldElem) -> WittElem:
        """The Teichmüller lift of a residue field element.

        Iterates ``x -> x^q`` from the digit-wise lift until it stabilizes.
        """
        x = self.from_residue(a).coeffs
        for _ in range(self.K + 1):
            nxt = self.raw_pow(x, self.params.q)
            if nxt == x:
                break
            x = nxt
        return WittElem(x, self.K)

    def add(self, a: WittElem, b: WittElem) -> WittElem:
        """Return ``a + b``."""
        return WittElem(self.raw_add(a.coeffs, b.coeffs), min(a.prec, b.prec))

    def sub(self, a: WittElem, b: WittElem) -> WittElem:
        """Return ``a - b``."""
        return WittElem(self.raw_sub(a.coeffs, b.coeffs), min(a.prec, b.prec))

    def mul(self, a: WittElem, b: WittElem) -> WittElem:
        """Return ``a * b`` with precision ``min(a.prec, b.prec)``."""
        return WittElem(self.raw_mul(a.coeffs, b.coeffs), min(a.prec, b.prec))

    def pow(self, a: WittElem, n: int) -> WittElem:
        """Return ``a^n``; negative ``n`` requires a unit."""
        base = a if n >= 0 else self.inv(a)
        return WittElem(self.raw_pow(base.coeffs, abs(n)), a.prec)

    def inv(self, a: WittElem) -> WittElem:
        """Return ``a^{-1}``.

        Raises:
            PrecisionError: If ``a`` has no valid digit.
            ZeroDivisionError: If ``a`` is not a unit.
        """
        if a.prec < 1:
            raise PrecisionError("cannot invert an element with precision 0")
        return WittElem(self.raw_inv(a.coeffs), a.prec)

    def scale_int(self, a: WittElem, n: int) -> WittElem:
        """Multiply by an integer, gaining precision ``v_p(n)``."""
        if n == 0:
            return WittElem(self.raw_zero(), self.K)
        v = p_valuation(n, self.params.p)
        return WittElem(self.raw_scale(a.coeffs, n), min(self.K, a.prec + v))

    def mul_p_power(self, a: WittElem, j: int) -> WittElem:
        """Return ``p^j * a``, gaining ``j`` digits of precision."""
        return self.scale_int(a, self.params.p**j)

    def divide_by_p(self, a: WittElem) -> WittElem:
        """Return ``a / p``.

        Raises:
            PrecisionError: If ``a.prec < 1`` or ``a`` is not divisible by ``p``.
        """
        p = self.params.p
        if a.prec < 1:
            raise PrecisionError("division by p of an element with precision 0")
        if any(c % p for c in a.coeffs):
            raise PrecisionError("division by p of a non-divisible element")
        return WittElem(tuple(c // p for c in a.coeffs), a.prec - 1)

    def reduce(self, a: WittElem) -> FieldElem:
        """Reduce modulo ``p`` into the residue field.

        Raises:
            PrecisionError: If ``a.prec < 1``.
        """
        if a.prec < 1:
            raise PrecisionError("reduction of an element with precision 0")
        p = self.params.p
        return _digits_to_int((c % p for c in a.coeffs), p)

    def agrees(self, a: WittElem, b: WittElem) -> bool:
        """Return True if ``a`` and ``b`` agree to their common precision."""
        m = self.params.p ** min(a.prec, b.prec)
        return all((x - y) % m == 0 for x, y in zip(a.coeffs, b.coeffs, strict=True))

    def is_unit(self, a: WittElem) -> bool:
        """Return True if ``a`` reduces to a non-zero residue."""
        return a.prec >= 1 and any(c % self.params.p for c in a.coeffs)


def witt_make(p: int, f: int, K: int) -> WittRing:
    """Build the ring ``O_F / p^K`` for the unramified ``F`` of degree ``f``.

    Raises:
        ValueError: If ``K < 1`` or ``p`` is not an odd prime.
    """
    return WittRing(PrimeParams(p, f), K)


def p_valuation(n: int, p: int) -> int:
    """Return the p-adic valuation of a non-zero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Truncated power series over k
# ---------------------------------------------------------------------------


def _clean(coeffs: Mapping[int, FieldElem], bound: int | None) -> dict[int, FieldElem]:
    return {
        d: c for d, c in coeffs.items() if c != 0 and (bound is None or d < bound)
    }


@dataclass(frozen=True)
class TruncSeries:
    """A power series over ``k`` known below the exclusive degree ``trunc``.

    Attributes:
        field: The coefficient field.
        coeffs: Non-zero coefficients by degree; never mutated.
        trunc: Exclusive truncation degree.
    """

    field: FieldContext
    coeffs: dict[int, FieldElem]
    trunc: int

    def __post_init__(self) -> None:
        if any(d < 0 or d >= self.trunc for d in self.coeffs):
            raise ValueError("series coefficient outside [0, trunc)")

    @classmethod
    def make(
        cls, ctx: FieldContext, coeffs: Mapping[int, FieldElem], trunc: int
    ) -> TruncSeries:
        """Build a series, dropping zeros and degrees at or beyond ``trunc``."""
        return cls(ctx, _clean(coeffs, trunc), trunc)

    @classmethod
    def monomial(
        cls, ctx: FieldContext, degree: int, trunc: int, coeff: FieldElem = 1
    ) -> TruncSeries:
        """``coeff * t^degree`` truncated at ``trunc``."""
        return cls.make(ctx, {degree: coeff}, trunc)

    def __getitem__(self, degree: int) -> FieldElem:
        if degree >= self.trunc:
            raise PrecisionError(f"degree {degree} beyond truncation {self.trunc}")
        return self.coeffs.get(degree, 0)

    def valuation(self) -> int | None:
        """Lowest degree with a non-zero coefficient, or None for zero."""
        return min(self.coeffs) if self.coeffs else None

    def is_zero(self) -> bool:
        """Return True if all known coefficients vanish."""
        return not self.coeffs

    def __add__(self, other: TruncSeries) -> TruncSeries:
        ctx = self.field
        trunc = min(self.trunc, other.trunc)
        out = {d: c for d, c in self.coeffs.items() if d < trunc}
        for d, c in other.coeffs.items():
            if d < trunc:
                out[d] = ctx.add(out.get(d, 0), c)
        return TruncSeries(ctx, _clean(out, None), trunc)

    def __neg__(self) -> TruncSeries:
        ctx = self.field
        negated = {d: ctx.neg(c) for d, c in self.coeffs.items()}
        return TruncSeries(ctx, negated, self.trunc)

    def __sub__(self, other: TruncSeries) -> TruncSeries:
        return self + (-other)

    def __mul__(self, other: TruncSeries) -> TruncSeries:
        ctx = self.field
        va, vb = self.valuation(), other.valuation()
        trunc = min(
            self.trunc + (vb if vb is not None else other.trunc),
            other.trunc + (va if va is not None else self.trunc),
        )
        out: dict[int, FieldElem] = {}
        for da, ca in self.coeffs.items():
            for db, cb in other.coeffs.items():
                d = da + db
                if d < trunc:
                    out[d] = ctx.add(out.get(d, 0), ctx.mul(ca, cb))
        return TruncSeries(ctx, _clean(out, None), trunc)

    def scale(self, c: FieldElem) -> TruncSeries:
        """Multiply every coefficient by the scalar ``c``."""
        ctx = self.field
        return TruncSeries(
            ctx,
            _clean({d: ctx.mul(c, a) for d, a in self.coeffs.items()}, None),
            self.trunc,
        )

    def shift(self, m: int) -> TruncSeries:
        """Multiply by ``t^m`` (``m >= 0``)."""
        return TruncSeries(
            self.field, {d + m: c for d, c in self.coeffs.items()}, self.trunc + m
        )

    def truncate(self, trunc: int) -> TruncSeries:
        """Forget coefficients at degree ``trunc`` and beyond."""
        return TruncSeries.make(self.field, self.coeffs, min(trunc, self.trunc))

    def pow(self, n: int) -> TruncSeries:
        """Raise to a non-negative power; negative powers need a unit series."""
        if n < 0:
            return self.inverse().pow(-n)
        result = TruncSeries.monomial(self.field, 0, self.trunc)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> TruncSeries:
        """The multiplicative inverse of a series with unit constant term.

        Raises:
            ZeroDivisionError: If the constant term vanishes.
        """
        ctx = self.field
        c0 = self.coeffs.get(0, 0)
        if c0 == 0:
            raise ZeroDivisionError("series without constant term is not invertible")
        inv0 = ctx.inv(c0)
        out: dict[int, FieldElem] = {0: inv0}
        terms = sorted((d, c) for d, c in self.coeffs.items() if d > 0)
        for n in range(1, self.trunc):
            acc = 0
            for d, c in terms:
                if d > n:
                    break
                prev = out.get(n - d, 0)
                if prev:
                    acc = ctx.add(acc, ctx.mul(c, prev))
            if acc:
                out[n] = ctx.neg(ctx.mul(inv0, acc))
        return TruncSeries(ctx, out, self.trunc)

    def substitute_power(self, k: int) -> TruncSeries:
        """Substitute ``t -> t^k`` (``k >= 1``)."""
        return TruncSeries(
            self.field, {d * k: c for d, c in self.coeffs.items()}, self.trunc * k
        )

    def items(self) -> Iterator[tuple[int, FieldElem]]:
        """Non-zero ``(degree, coefficient)`` pairs in increasing degree."""
        return iter(sorted(self.coeffs.items()))


def series_compose(outer: TruncSeries, inner: TruncSeries) -> TruncSeries:
    """Compose ``outer(inner(t))``.

    The result is truncated at ``min(outer.trunc * val(inner), inner.trunc)``.

    Raises:
        ValueError: If ``inner`` has a non-zero constant term.
    """
    if inner.coeffs.get(0, 0):
        raise ValueError("inner series must have zero constant term")
    ctx = outer.field
    v = inner.valuation()
    if v is None:
        return TruncSeries.make(ctx, {0: outer.coeffs.get(0, 0)}, inner.trunc)
    trunc = min(outer.trunc * v, inner.trunc)
    result = TruncSeries.make(ctx, {0: outer.coeffs.get(0, 0)}, trunc)
    power = TruncSeries.monomial(ctx, 0, trunc)
    last = 0
    for n, c in outer.items():
        if n == 0:
            continue
        if n * v >= trunc:
            break
        power = power * inner.pow(n - last) if n > last else power
        power = power.truncate(trunc)
        last = n
        result = result + power.scale(c)
    return result.truncate(trunc)


# ---------------------------------------------------------------------------
# Exact Laurent polynomials over k
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentPoly:
    """A finite Laurent polynomial over ``k``.

    Attributes:
        field: The coefficient field.
        coeffs: Non-zero coefficients by integer degree; never mutated.
    """

    field: FieldContext
    coeffs: dict[int, FieldElem]

    @classmethod
    def make(cls, ctx: FieldContext, coeffs: Mapping[int, FieldElem]) -> LaurentPoly:
        """Build a Laurent polynomial, dropping zero coefficients."""
        return cls(ctx, _clean(coeffs, None))

    @classmethod
    def zero(cls, ctx: FieldContext) -> LaurentPoly:
        """The zero polynomial."""
        return cls(ctx, {})

    @classmethod
    def monomial(cls, ctx: FieldContext, degree: int, coeff: FieldElem) -> LaurentPoly:
        """``coeff * t^degree``."""
        return cls.make(ctx, {degree: coeff})

    def is_zero(self) -> bool:
        """Return True for the zero polynomial."""
        return not self.coeffs

    def is_monomial(self) -> bool:
        """Return True if exactly one coefficient is non-zero."""
        return len(self.coeffs) == 1

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        ctx = self.field
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = ctx.add(out.get(d, 0), c)
        return LaurentPoly.make(ctx, out)

    def __neg__(self) -> LaurentPoly:
        ctx = self.field
        return LaurentPoly(ctx, {d: ctx.neg(c) for d, c in self.coeffs.items()})

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        return self + (-other)

    def __mul__(self, other: LaurentPoly) -> LaurentPoly:
        ctx = self.field
        out: dict[int, FieldElem] = {}
        for da, ca in self.coeffs.items():
            for db, cb in other.coeffs.items():
                out[da + db] = ctx.add(out.get(da + db, 0), ctx.mul(ca, cb))
        return LaurentPoly.make(ctx, out)

    def scale(self, c: FieldElem) -> LaurentPoly:
        """Multiply by the scalar ``c``."""
        ctx = self.field
        return LaurentPoly.make(ctx, {d: ctx.mul(c, a) for d, a in self.coeffs.items()})

    def substitute_power(self, k: int) -> LaurentPoly:
        """Substitute ``t -> t^k``."""
        return LaurentPoly(self.field, {d * k: c for d, c in self.coeffs.items()})

    def to_series(self, trunc: int) -> TruncSeries:
        """View a polynomial with non-negative support as a truncated series.

        Raises:
            ValueError: If a negative degree is present.
        """
        if any(d < 0 for d in self.coeffs):
            raise ValueError("Laurent polynomial has negative support")
        return TruncSeries.make(self.field, self.coeffs, trunc)

    def as_json(self) -> dict[str, int]:
        """``{exponent: coefficient}`` with string keys sorted numerically."""
        return {str(d): c for d, c in sorted(self.coeffs.items())}


def binomial_mod_p(n: int, m: int, p: int) -> int:
    """``C(n, m) mod p`` via Lucas' theorem; ``n`` may be negative."""
    if m < 0:
        return 0
    if n < 0:
        # C(n, m) = (-1)^m C(m - n - 1, m)
        return ((-1) ** m * binomial_mod_p(m - n - 1, m, p)) % p
    result = 1
    while n or m:
        a, b = n % p, m % p
        if b > a:
            return 0
        result = result * math.comb(a, b) % p
        n //= p
        m //= p
    return result
