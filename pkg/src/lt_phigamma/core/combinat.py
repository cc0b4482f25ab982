"""Digit combinatorics on ``F = Z/fZ``.

Subsets of ``F`` are bit masks. An exponent ``ell`` in ``[0, q - 2]`` carries
two digit systems: the standard base-``p`` digits ``m`` and the anti-digits
``a`` in ``[1, p]`` (not all ``p``) with ``ell = -sum a_i p^i (mod q - 1)``.
Both are extended periodically, ``m_{i+f} = m_i``. Everything else in this
module (the split ``F = D(ell) + E(ell)``, ``sigma``, ``i_D``, ``nu``,
``delta``, ``mu`` and maximality) is derived from these digits.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache

from lt_phigamma.core.arith import PrimeParams

# ---------------------------------------------------------------------------
# Subsets of F
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class FSubset:
    """A subset of ``F = {0, ..., f - 1}`` stored as a bit mask.

    Integer arguments to membership and constructors are reduced modulo ``f``,
    so ``3 in FSubset.of(2, [1])`` holds.

    Attributes:
        f: The size of ``F``.
        mask: Bit ``i`` is set iff ``i`` belongs to the subset.

    Raises:
        ValueError: If ``f`` is outside ``[1, 16]`` or ``mask`` has bits
            beyond ``f``.
    """

    f: int
    mask: int

    def __post_init__(self) -> None:
        if not 1 <= self.f <= 16:
            raise ValueError(f"f must lie in [1, 16], got {self.f}")
        if not 0 <= self.mask < (1 << self.f):
            raise ValueError(f"mask {self.mask:#x} out of range for f={self.f}")

    @classmethod
    def of(cls, f: int, members: Iterable[int]) -> FSubset:
        """Build a subset from integers, reducing each modulo ``f``."""
        mask = 0
        for x in members:
            mask |= 1 << (x % f)
        return cls(f, mask)

    @classmethod
    def empty(cls, f: int) -> FSubset:
        return cls(f, 0)

    @classmethod
    def full(cls, f: int) -> FSubset:
        return cls(f, (1 << f) - 1)

    @classmethod
    def interval(cls, f: int, x: int, y: int) -> FSubset:
        """``Pi([x, y])`` for integers; empty when ``y < x``."""
        if y < x:
            return cls.empty(f)
        if y - x + 1 >= f:
            return cls.full(f)
        return cls.of(f, range(x, y + 1))

    @classmethod
    def all_subsets(cls, f: int) -> Iterator[FSubset]:
        """All ``2^f`` subsets in mask order."""
        for mask in range(1 << f):
            yield cls(f, mask)

    # -- set protocol -------------------------------------------------------

    def __contains__(self, x: object) -> bool:
        if not isinstance(x, int):
            return False
        return bool(self.mask >> (x % self.f) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __or__(self, other: FSubset) -> FSubset:
        return FSubset(self.f, self.mask | other.mask)

    def __and__(self, other: FSubset) -> FSubset:
        return FSubset(self.f, self.mask & other.mask)

    def __sub__(self, other: FSubset) -> FSubset:
        return FSubset(self.f, self.mask & ~other.mask)

    def __xor__(self, other: FSubset) -> FSubset:
        return FSubset(self.f, self.mask ^ other.mask)

    @property
    def members(self) -> tuple[int, ...]:
        """Sorted elements in ``[0, f - 1]``."""
        return tuple(i for i in range(self.f) if self.mask >> i & 1)

    def issubset(self, other: FSubset) -> bool:
        return self.mask & ~other.mask == 0

    def is_empty(self) -> bool:
        return self.mask == 0

    def is_full(self) -> bool:
        return self.mask == (1 << self.f) - 1

    def shift(self, k: int) -> FSubset:
        """``{x + k : x in self}``."""
        return FSubset.of(self.f, (x + k for x in self.members))

    def image(self, fn: Callable[[int], int]) -> FSubset:
        """``{fn(x) : x in self}``, reduced modulo ``f``."""
        return FSubset.of(self.f, (fn(x) for x in self.members))

    def as_json(self) -> list[int]:
        return list(self.members)

    # -- derived views -----------------------------------------------------

    @property
    def jc(self) -> FSubset:
        """The complement ``J^c``."""
        return FSubset(self.f, ~self.mask & ((1 << self.f) - 1))

    @property
    def jminus(self) -> FSubset:
        """``J^- = {j in J : j - 1 not in J}``, the run starts."""
        return FSubset.of(
            self.f, (j for j in self.members if (j - 1) not in self)
        )

    @property
    def jplus(self) -> FSubset:
        """``J^+ = (J^c)^-``, the first index after each run."""
        return self.jc.jminus

    @property
    def jc1(self) -> FSubset:
        """``J^{c,1} = J^c + 1``."""
        return self.jc.shift(1)

    def run_end(self, j: int) -> int:
        """The integer ``j^+ > j`` closing the run of ``J`` starting at ``j``.

        ``J`` is the disjoint union of the integer intervals ``[j, j^+ - 1]``
        over ``j`` in ``J^-``, taken modulo ``f``.

        Raises:
            ValueError: If ``j`` is not a run start.
        """
        if j not in self.jminus:
            raise ValueError(f"{j} does not start a run of {self.members}")
        k = j + 1
        while k in self:
            k += 1
        return k

    def runs(self) -> list[tuple[int, int]]:
        """The runs ``(j, j^+)`` for ``j`` in ``J^-``, sorted by ``j``."""
        return [(j, self.run_end(j)) for j in self.jminus.members]


# ---------------------------------------------------------------------------
# Digits
# ---------------------------------------------------------------------------


def _base_p(value: int, p: int, f: int) -> tuple[int, ...]:
    out: list[int] = []
    for _ in range(f):
        value, r = divmod(value, p)
        out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class Digits:
    """Both digit vectors of an exponent ``ell`` in ``[0, q - 2]``.

    Attributes:
        params: The prime data.
        ell: The exponent.
        m: Standard digits, ``ell = sum m_i p^i``, not all ``p - 1``.
        a: Anti-digits in ``[1, p]``, not all ``p``,
            ``ell = -sum a_i p^i (mod q - 1)``.
    """

    params: PrimeParams
    ell: int
    m: tuple[int, ...]
    a: tuple[int, ...]

    def m_at(self, i: int) -> int:
        """Periodic standard digit ``m_i``."""
        return self.m[i % self.params.f]

    def a_at(self, i: int) -> int:
        """Periodic anti-digit ``a_i``."""
        return self.a[i % self.params.f]


def _check_ell(params: PrimeParams, ell: int) -> None:
    if not 0 <= ell <= params.q - 2:
        raise ValueError(f"ell must lie in [0, {params.q - 2}], got {ell}")


@lru_cache(maxsize=4096)
def digits_of(params: PrimeParams, ell: int) -> Digits:
    """Compute both digit systems of ``ell``.

    Args:
        params: The prime data.
        ell: An exponent in ``[0, q - 2]``.

    Returns:
        The cached :class:`Digits`.

    Raises:
        ValueError: If ``ell`` is out of range.
    """
    _check_ell(params, ell)
    p, f, xi = params.p, params.f, params.xi
    # sum (a_i - 1) p^i covers [0, q - 2] exactly once as a runs over
    # [1, p]^f minus (p, ..., p).
    shifted = (-ell - xi // (p - 1)) % xi
    a = tuple(d + 1 for d in _base_p(shifted, p, f))
    return Digits(params, ell, _base_p(ell, p, f), a)


def ell_from_anti_digits(params: PrimeParams, a: Iterable[int]) -> int:
    """``-sum a_i p^i mod (q - 1)``: the inverse of the anti-digit map."""
    return -sum(ai * params.p**i for i, ai in enumerate(a)) % params.xi


def signed_sum(params: PrimeParams, a: tuple[int, ...], J: FSubset) -> int:
    """``sum_{J} a_j p^j - sum_{J^c} a_j p^j`` as an integer."""
    p = params.p
    return sum((aj if j in J else -aj) * p**j for j, aj in enumerate(a))


def ell_at(params: PrimeParams, ell: int, i: int) -> int:
    """``ell_[i] = sum_{j=0}^{f-1} m_{j+i} p^{j+i}``, unreduced.

    It is congruent to ``ell`` modulo ``q - 1``.

    Raises:
        ValueError: If ``i`` is negative or ``ell`` out of range.
    """
    if i < 0:
        raise ValueError(f"index must be non-negative, got {i}")
    digits = digits_of(params, ell)
    p, f = params.p, params.f
    return sum(digits.m_at(j + i) * p ** (j + i) for j in range(f))


class DigitType(StrEnum):
    """Shape of a nonzero exponent when ``f = 2``."""

    A = "a"
    B = "b"
    C = "c"


def digit_type(params: PrimeParams, ell: int) -> DigitType:
    """Classify ``ell`` in ``[1, q - 2]`` for ``f = 2`` by its digits.

    Type (a) has no digit ``p - 1``; type (b) has ``m_1 = p - 1``; type (c)
    has ``m_0 = p - 1``.

    Raises:
        ValueError: If ``f != 2`` or ``ell`` is zero or out of range.
    """
    if params.f != 2:
        raise ValueError("digit types are defined for f = 2 only")
    if ell == 0:
        raise ValueError("ell = 0 has no digit type")
    m = digits_of(params, ell).m
    top = params.p - 1
    if m[1] == top:
        return DigitType.B
    if m[0] == top:
        return DigitType.C
    return DigitType.A


# ---------------------------------------------------------------------------
# D(ell), E(ell) and sigma
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def de_split(params: PrimeParams, ell: int) -> tuple[FSubset, FSubset]:
    """Split ``F`` into ``(D(ell), E(ell))`` by scanning standard digits.

    ``i`` lies in ``E(ell)`` iff some ``r`` in ``[i - f, i - 1]`` has
    ``m_r = p - 1`` and ``m_s = p - 2`` for all ``r < s < i``.

    Raises:
        ValueError: If ``ell`` is out of range.
    """
    digits = digits_of(params, ell)
    p, f = params.p, params.f
    exceptional: list[int] = []
    for i in range(f):
        for r in range(i - 1, i - f - 1, -1):
            if digits.m_at(r) == p - 1:
                exceptional.append(i)
                break
            if digits.m_at(r) != p - 2:
                break
    E = FSubset.of(f, exceptional)
    return E.jc, E


def e_set_from_anti_digits(params: PrimeParams, ell: int) -> FSubset:
    """``E(ell)`` read off the anti-digits.

    ``i`` is exceptional iff the nearest ``j < i`` with ``a_j != p - 1``
    exists and has ``a_j = p``.
    """
    digits = digits_of(params, ell)
    p, f = params.p, params.f
    members = []
    for i in range(f):
        for j in range(i - 1, i - f - 1, -1):
            if digits.a_at(j) != p - 1:
                if digits.a_at(j) == p:
                    members.append(i)
                break
    return FSubset.of(f, members)


def sigma(params: PrimeParams, ell: int, j: int) -> int:
    """``1`` if ``Pi(j)`` lies in ``D(ell)``, else ``2``."""
    return 2 if j in de_split(params, ell)[1] else 1


# ---------------------------------------------------------------------------
# i_D, i_E and their integer companions
# ---------------------------------------------------------------------------


def i_d_lift(params: PrimeParams, ell: int, i_prime: int) -> int:
    """The integer ``i_D(i') + m_D(i') f``.

    Walk down from ``i'`` over the digits ``p - 1`` to ``i''``, the least
    index with ``m_j = p - 1`` on ``[i'', i')`` and ``m_{i''-1} != p - 1``.
    The result is ``i''`` when ``Pi(i'')`` lies in ``D(ell)`` and ``i'' - 1``
    otherwise.
    """
    digits = digits_of(params, ell)
    top = params.p - 1
    i2 = i_prime
    while digits.m_at(i2 - 1) == top:
        i2 -= 1
    if i2 in de_split(params, ell)[0]:
        return i2
    return i2 - 1


def i_d(params: PrimeParams, ell: int, i_prime: int) -> int:
    """``i_D(i')`` in ``F``."""
    return i_d_lift(params, ell, i_prime) % params.f


def m_d(params: PrimeParams, ell: int, i_prime: int) -> int:
    """``m_D(i')``, defined by ``i_D(i') + m_D(i') f = i_d_lift(i')``."""
    return i_d_lift(params, ell, i_prime) // params.f


def i_e(params: PrimeParams, i_prime: int) -> int:
    """``i_E(i') = Pi(i')``."""
    return i_prime % params.f


def m_e(params: PrimeParams, i_prime: int) -> int:
    """``m_E(i')``, defined by ``i' = i_E(i') + m_E(i') f``."""
    return i_prime // params.f


def i_d_closed_lift(params: PrimeParams, ell: int, i: int) -> int:
    """Integer form of ``i_D`` read off the anti-digits.

    Returns the nearest ``j < i`` with ``a_j = p`` and ``a_s = p - 1`` on
    ``(j, i)`` when it exists, otherwise ``i`` itself.
    """
    digits = digits_of(params, ell)
    p, f = params.p, params.f
    for j in range(i - 1, i - f - 1, -1):
        if digits.a_at(j) != p - 1:
            return j if digits.a_at(j) == p else i
    return i


def i_d_closed(params: PrimeParams, ell: int, i: int) -> int:
    """``i_D(i)`` in ``F`` from the anti-digit closed form."""
    return i_d_closed_lift(params, ell, i) % params.f


# ---------------------------------------------------------------------------
# nu, delta, mu
# ---------------------------------------------------------------------------


def nu(params: PrimeParams, ell_tilde: int, ell_bar: int, x: int) -> int:
    """``nu(x) = i_D^{ell_bar}(x)`` if ``x`` is in ``D(ell_tilde)``, else ``x``."""
    x %= params.f
    if x in de_split(params, ell_tilde)[1]:
        return x
    return i_d_closed(params, ell_bar, x)


def nu_map(params: PrimeParams, ell_tilde: int, ell_bar: int) -> tuple[int, ...]:
    """The values ``(nu(0), ..., nu(f - 1))``."""
    return tuple(nu(params, ell_tilde, ell_bar, x) for x in range(params.f))


def nu_image(
    params: PrimeParams, ell_tilde: int, ell_bar: int, subset: FSubset
) -> FSubset:
    """``nu(subset)``."""
    return subset.image(lambda x: nu(params, ell_tilde, ell_bar, x))


def delta_lift(params: PrimeParams, ell_bar: int, j: int) -> int:
    """Integer lift ``i_D(j + 1) - 1`` of ``delta(j)``, lying in ``[j - f, j]``."""
    return i_d_closed_lift(params, ell_bar, j + 1) - 1


def delta(params: PrimeParams, ell_bar: int, j: int) -> int:
    """``delta(j) = Pi(i_D^{ell_bar}(j + 1) - 1)``."""
    return delta_lift(params, ell_bar, j) % params.f


def mu_start_choices(params: PrimeParams, ell_bar: int, jc: FSubset) -> list[int]:
    """The admissible first indices ``i_1 in delta(J^c) - J^c``, sorted."""
    image = jc.image(lambda j: delta(params, ell_bar, j))
    return list((image - jc).members)


def mu(
    params: PrimeParams, ell_bar: int, jc: FSubset, start: int | None = None
) -> FSubset:
    """The re-indexed set ``mu(J^c)``.

    If ``delta(J^c)`` is contained in ``J^c`` the result is ``J^c``. Otherwise
    pick ``i_1`` in ``delta(J^c) - J^c`` (``start``, default the least one), let
    ``j_1 > i_1`` be the least integer with ``Pi(j_1)`` in ``J^c`` and
    ``delta(j_1) = i_1``, list ``J^c`` as ``j_1 < ... < j_r < j_1 + f`` and put
    ``i_k = delta(j_k)`` when ``i_{k-1} < delta(j_k)``, else ``j_k``, using the
    integer lift of ``delta``.

    Raises:
        ValueError: If ``start`` is not an admissible first index.
    """
    f = params.f
    choices = mu_start_choices(params, ell_bar, jc)
    if not choices:
        return jc
    i1 = choices[0] if start is None else start
    if i1 not in choices:
        raise ValueError(f"{i1} is not in delta(J^c) - J^c = {choices}")
    j1 = next(
        j
        for j in range(i1 + 1, i1 + f + 1)
        if j in jc and delta(params, ell_bar, j) == i1
    )
    js = [j for j in range(j1, j1 + f) if j in jc]
    indices = [i1]
    for j in js[1:]:
        lifted = delta_lift(params, ell_bar, j)
        indices.append(lifted if indices[-1] < lifted else j)
    return FSubset.of(f, indices)


def is_maximal(params: PrimeParams, ell_tilde: int, jc: FSubset) -> bool:
    """Whether ``J^c`` is maximal with respect to ``ell_tilde``.

    ``J^c`` is maximal when no window ``(a_i, ..., a_j) = (p, p-1, ..., p-1, 1)``
    has ``[i, j - 1]`` inside ``J`` and ``j`` in ``J^c``, and ``J != F`` when
    every anti-digit is ``p - 1``.
    """
    a = digits_of(params, ell_tilde).a
    p, f = params.p, params.f
    J = jc.jc
    if all(x == p - 1 for x in a) and J.is_full():
        return False
    for i in range(f):
        if a[i] != p or i not in J:
            continue
        for j in range(i + 1, i + f):
            if j not in J or a[j % f] != p - 1:
                if a[j % f] == 1 and j in jc:
                    return False
                break
    return True


# ---------------------------------------------------------------------------
# Interval maps
# ---------------------------------------------------------------------------


def nu_floor(params: PrimeParams, ell1: int, ell2: int, x: int) -> int:
    """The largest integer ``<= x`` congruent to ``nu(x)`` modulo ``f``."""
    return x - (x - nu(params, ell1, ell2, x)) % params.f


def interval_image(
    params: PrimeParams, ell1: int, ell2: int, a: int, b: int
) -> tuple[int, int] | None:
    """Integer bounds of ``I[a, b) = [nu_floor(a), nu_floor(b) - 1]``.

    Returns ``None`` when the interval is empty.
    """
    lo = nu_floor(params, ell1, ell2, a)
    hi = nu_floor(params, ell1, ell2, b)
    return (lo, hi - 1) if lo < hi else None


def interval_left(
    params: PrimeParams, ell1: int, ell2: int, a: int, b: int
) -> FSubset:
    """The part ``I[a, b)_|-`` of ``I[a, b)`` that is cut off at zero."""
    f = params.f
    bounds = interval_image(params, ell1, ell2, a, b)
    if bounds is None:
        return FSubset.empty(f)
    lo, hi = bounds
    if lo <= 0 <= hi:
        return FSubset.interval(f, 0, hi)
    if (hi + 1, b) == (0, 1):
        return FSubset.empty(f)
    return FSubset.interval(f, lo, hi)


def interval_right(
    params: PrimeParams, ell1: int, ell2: int, a: int, b: int
) -> FSubset:
    """The remainder ``I[a, b)_-|`` of ``I[a, b)`` after :func:`interval_left`."""
    f = params.f
    bounds = interval_image(params, ell1, ell2, a, b)
    if bounds is None:
        return FSubset.empty(f)
    whole = FSubset.interval(f, *bounds)
    return whole - interval_left(params, ell1, ell2, a, b)
