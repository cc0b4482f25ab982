"""Strata, degeneration relations and Serre weights.

Two universes are modelled here:

* ``D``-strata: pairs ``(ell, I)`` with ``I`` a subset of ``F``, and classes
  ``[[h]]`` in ``Z/(q+1)``. The relations ``>_J`` live on these.
* ``E``-strata: triples ``(ell, u, I)`` and classes ``[h]`` in ``Z/(q^2-1)``.
  The one-step degeneration ``|>`` and its transitive closure live on these.

``E``-strata are stored canonically: ``[h]`` as the least element of the orbit
``{h, qh}`` and ``(ell, u, {})`` as the least of ``(ell, u)`` and its swap
partner ``(-ell, u - ell)``.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property

from loguru import logger

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.combinat import (
    FSubset,
    digits_of,
    nu_image,
    sigma,
    signed_sum,
)
from lt_phigamma.core.errors import BudgetExceededError

# ---------------------------------------------------------------------------
# Stratum types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class DPair:
    """A reducible ``D``-stratum ``(ell, I)``."""

    ell: int
    iset: FSubset


@dataclass(frozen=True, order=True)
class DClass:
    """An irreducible ``D``-stratum ``[[h]]``, ``h`` in ``[0, q]``."""

    h: int


type StratumD = DPair | DClass


@dataclass(frozen=True, order=True)
class Reducible:
    """A reducible ``E``-stratum ``(ell, u, I)`` in canonical form.

    Build instances with :func:`reducible` so the swap identification of
    ``(ell, u, {})`` is applied.
    """

    ell: int
    u: int
    iset: FSubset


@dataclass(frozen=True, order=True)
class Irreducible:
    """An irreducible ``E``-stratum ``[h]``, canonical in its ``{h, qh}`` orbit."""

    h: int


type StratumE = Reducible | Irreducible


def reducible(params: PrimeParams, ell: int, u: int, iset: FSubset) -> Reducible:
    """Canonical ``(ell, u, I)``; ``ell`` and ``u`` are reduced mod ``q - 1``.

    Raises:
        ValueError: If ``iset`` lives on a different ``f``.
    """
    xi = params.xi
    if iset.f != params.f:
        raise ValueError(f"subset over f={iset.f}, expected f={params.f}")
    ell, u = ell % xi, u % xi
    if iset.is_empty():
        ell, u = min((ell, u), ((-ell) % xi, (u - ell) % xi))
    return Reducible(ell, u, iset)


def irreducible(params: PrimeParams, h: int) -> Irreducible:
    """Canonical ``[h]``: the least of ``h`` and ``qh`` modulo ``q^2 - 1``.

    Raises:
        ValueError: If ``q + 1`` divides ``h``. Such an ``h`` has ``qh = h``
            and only labels split representations.
    """
    n = params.q**2 - 1
    if h % (params.q + 1) == 0:
        raise ValueError(f"[{h}] is not irreducible: q + 1 divides it")
    return Irreducible(min(h % n, params.q * h % n))


def d_class(params: PrimeParams, h: int) -> DClass:
    return DClass(h % (params.q + 1))


def stratum_key(e: StratumE) -> tuple[int, int, int, int]:
    """Total order on ``E``-strata: reducible first, then by fields."""
    match e:
        case Reducible(ell, u, iset):
            return (0, ell, u, iset.mask)
        case Irreducible(h):
            return (1, h, 0, 0)


def d_key(d: StratumD) -> tuple[int, int, int]:
    match d:
        case DPair(ell, iset):
            return (0, ell, iset.mask)
        case DClass(h):
            return (1, h, 0)


def raw_members(params: PrimeParams, e: Reducible) -> list[tuple[int, int, FSubset]]:
    """The triples identified with ``e`` (two for distinct swap partners)."""
    out = [(e.ell, e.u, e.iset)]
    if e.iset.is_empty():
        partner = ((-e.ell) % params.xi, (e.u - e.ell) % params.xi, e.iset)
        if partner != out[0]:
            out.append(partner)
    return out


def projections(params: PrimeParams, e: StratumE) -> frozenset[StratumD]:
    """``[[e]]`` for every member of the identification class of ``e``."""
    match e:
        case Reducible():
            members = raw_members(params, e)
            return frozenset(DPair(ell, iset) for ell, _, iset in members)
        case Irreducible(h):
            return frozenset({d_class(params, h), d_class(params, params.q * h)})


def all_strata(params: PrimeParams) -> list[StratumE]:
    """Every canonical ``E``-stratum at ``(p, f)``, sorted by :func:`stratum_key`."""
    xi, f = params.xi, params.f
    seen: set[StratumE] = set()
    for ell in range(xi):
        for u in range(xi):
            for iset in FSubset.all_subsets(f):
                seen.add(reducible(params, ell, u, iset))
    for h in range(params.q**2 - 1):
        if h % (params.q + 1):
            seen.add(irreducible(params, h))
    return sorted(seen, key=stratum_key)


def stratum_count(params: PrimeParams) -> int:
    """Upper bound on the size of :func:`all_strata` without enumerating it."""
    return params.xi**2 * 2**params.f + params.q**2 - params.q


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def stratum_to_json(e: StratumE) -> dict[str, object]:
    match e:
        case Reducible(ell, u, iset):
            return {"kind": "red", "ell": ell, "u": u, "I": iset.as_json()}
        case Irreducible(h):
            return {"kind": "irr", "h": h}


def stratum_from_json(params: PrimeParams, data: Mapping[str, object]) -> StratumE:
    """Parse and canonicalize a stratum.

    Raises:
        ValueError: On an unknown kind or malformed fields.
    """
    kind = data.get("kind")
    if kind == "irr":
        h = data.get("h")
        if not isinstance(h, int):
            raise ValueError(f"irreducible stratum needs an integer h: {data}")
        return irreducible(params, h)
    if kind == "red":
        ell, u, members = data.get("ell"), data.get("u"), data.get("I")
        if not isinstance(ell, int) or not isinstance(u, int):
            raise ValueError(f"reducible stratum needs integer ell and u: {data}")
        if not isinstance(members, list):
            raise ValueError(f"reducible stratum needs a list I: {data}")
        indices = [x for x in members if isinstance(x, int)]
        if len(indices) != len(members) or any(
            not 0 <= x < params.f for x in indices
        ):
            raise ValueError(f"I must list indices in [0, {params.f - 1}]: {data}")
        return reducible(params, ell, u, FSubset.of(params.f, indices))
    raise ValueError(f"unknown stratum kind {kind!r}")


# ---------------------------------------------------------------------------
# The relations >_J on D-strata
# ---------------------------------------------------------------------------


def succ_ell(params: PrimeParams, ell_tilde: int, ell_bar: int, J: FSubset) -> bool:
    """``ell_bar = sum_J a_j p^j - sum_{J^c} a_j p^j (mod q - 1)``."""
    a = digits_of(params, ell_tilde).a
    return (signed_sum(params, a, J) - ell_bar) % params.xi == 0


def target_ell(params: PrimeParams, ell_tilde: int, J: FSubset) -> int:
    """The unique ``ell_bar`` in ``[0, q - 2]`` with ``ell_tilde >_J ell_bar``."""
    a = digits_of(params, ell_tilde).a
    return signed_sum(params, a, J) % params.xi


def succ_plus(params: PrimeParams, ell: int, h: int, J: FSubset) -> bool:
    """``h = sum_J a_j p^j - sum_{J^c} a_j p^j (mod q + 1)``."""
    a = digits_of(params, ell).a
    return (signed_sum(params, a, J) - h) % (params.q + 1) == 0


def _zero_condition(iset: FSubset, J: FSubset) -> bool:
    zero = FSubset.of(iset.f, [0])
    ends = J.jminus | J.jplus
    return (iset.jc & zero).issubset(ends) and ends.issubset(iset | zero)


def succ_d(params: PrimeParams, d1: DPair, d2: StratumD, J: FSubset) -> bool:
    """``d1 >_J d2`` on ``D``-strata.

    For a pair target this asks ``ell_tilde >_J ell_bar``, ``J^- + J^+``
    inside ``I_tilde`` and ``I_bar`` inside ``nu(I_tilde & J^{c,1})``. For a
    class target ``[[h]]`` it asks the zero-decorated support condition and
    ``ell >_J^+ h``.
    """
    match d2:
        case DPair(ell_bar, iset_bar):
            if not succ_ell(params, d1.ell, ell_bar, J):
                return False
            if not (J.jminus | J.jplus).issubset(d1.iset):
                return False
            allowed = nu_image(params, d1.ell, ell_bar, d1.iset & J.jc1)
            return iset_bar.issubset(allowed)
        case DClass(h):
            return _zero_condition(d1.iset, J) and succ_plus(params, d1.ell, h, J)


def succ_d_targets(
    params: PrimeParams, d1: DPair, J: FSubset
) -> Iterator[StratumD]:
    """All ``d2`` with ``d1 >_J d2``: the pair targets, then the class targets."""
    if (J.jminus | J.jplus).issubset(d1.iset):
        ell_bar = target_ell(params, d1.ell, J)
        allowed = nu_image(params, d1.ell, ell_bar, d1.iset & J.jc1)
        for iset in FSubset.all_subsets(params.f):
            if iset.issubset(allowed):
                yield DPair(ell_bar, iset)
    if _zero_condition(d1.iset, J):
        a = digits_of(params, d1.ell).a
        yield DClass(signed_sum(params, a, J) % (params.q + 1))


# ---------------------------------------------------------------------------
# The degeneration relation on E-strata
# ---------------------------------------------------------------------------


def window_sum(params: PrimeParams, a: tuple[int, ...], lo: int, hi: int) -> int:
    """``sum_{i=lo}^{hi-1} a_i p^i`` with periodic ``a``."""
    f, p = params.f, params.p
    return sum(a[i % f] * p**i for i in range(lo, hi))


def _digit_window(params: PrimeParams, ell: int, lo: int, hi: int) -> int:
    m = digits_of(params, ell).m
    f, p = params.f, params.p
    return sum(m[i % f] * p**i for i in range(lo, hi))


def case_iv_target(
    params: PrimeParams,
    ell_t: int,
    u_t: int,
    iset_t: FSubset,
    i1: int,
    i2: int,
) -> tuple[int, int, FSubset] | None:
    """The raw target of a case (IV) degeneration along ``i1 < i2 < i1 + f``.

    Returns ``None`` when the support condition fails or ``ell_bar = 0``.
    """
    f, xi, p = params.f, params.xi, params.p
    if i1 not in iset_t or i2 not in iset_t:
        return None
    if not iset_t.issubset(FSubset.interval(f, i1, i2)):
        return None
    a = digits_of(params, ell_t).a
    ell_b = (window_sum(params, a, i2, i1 + f) - window_sum(params, a, i1, i2)) % xi
    if ell_b == 0:
        return None
    w = (
        sigma(params, ell_t, i2) * p**i2
        - sigma(params, ell_t, i1) * p**i1
        - _digit_window(params, ell_t, i1, i2)
    )
    u_b = (u_t - ell_t - w) % xi
    iset_b = nu_image(params, ell_t, ell_b, iset_t - FSubset.of(f, [i1]))
    return ell_b, u_b, iset_b


def irreducible_target_h(
    params: PrimeParams, ell_t: int, u_t: int, i: int
) -> int | None:
    """``h`` with ``(ell_t, u_t, {Pi(i)}) |> [h]``, or ``None`` if excluded.

    ``h = -S - (q + 1) u_t`` modulo ``q^2 - 1`` with
    ``S = sum_{j=i}^{i+f-1} a_j p^j``.
    """
    if ell_t == 0 or (ell_t + 2 * params.p**i) % params.xi == 0:
        return None
    a = digits_of(params, ell_t).a
    s = window_sum(params, a, i, i + params.f)
    return (-s - (params.q + 1) * u_t) % (params.q**2 - 1)


def _raw_successors(
    params: PrimeParams, ell_t: int, u_t: int, iset_t: FSubset
) -> Iterator[StratumE]:
    f, xi, p = params.f, params.xi, params.p
    # (I): shrink the support.
    for iset in FSubset.all_subsets(f):
        if iset.issubset(iset_t):
            yield reducible(params, ell_t, u_t, iset)
    # (II): swap onto the split extension.
    yield reducible(params, -ell_t, u_t - ell_t, FSubset.empty(f))
    if len(iset_t) == 1:
        (x,) = iset_t.members
        # (III): collapse onto ell_bar = 0. Its family needs ell_t != 0, and
        # ell_t = 0 meets the congruence only for xi = 2, where the edge
        # would move (0, u, {x}) onto (0, u + 1, {}).
        i = 2 * f + x
        if ell_t != 0 and (ell_t + 2 * p**i) % xi == 0:
            yield reducible(params, 0, p**i + u_t, FSubset.empty(f))
        for i in (x, x + f):
            h = irreducible_target_h(params, ell_t, u_t, i)
            if h is not None:
                yield irreducible(params, h)
    # (IV)
    for i1 in range(2 * f, 3 * f):
        for i2 in range(i1 + 1, i1 + f):
            target = case_iv_target(params, ell_t, u_t, iset_t, i1, i2)
            if target is not None:
                yield reducible(params, *target)


def rhd_successors(params: PrimeParams, e: StratumE) -> frozenset[StratumE]:
    """Every ``e2`` with ``e |> e2``, in canonical form."""
    match e:
        case Irreducible(h):
            return frozenset({e, irreducible(params, params.q * h)})
        case Reducible():
            out: set[StratumE] = set()
            for ell, u, iset in raw_members(params, e):
                out.update(_raw_successors(params, ell, u, iset))
            return frozenset(out)


def rhd(params: PrimeParams, e1: StratumE, e2: StratumE) -> bool:
    """One-step degeneration ``e1 |> e2``."""
    return e2 in rhd_successors(params, e1)


@dataclass
class StrataGraph:
    """The degeneration graph on all canonical ``E``-strata at ``(p, f)``.

    Attributes:
        params: The prime data.
        max_nodes: Refuse to build graphs with more nodes than this.

    Raises:
        BudgetExceededError: If the node count exceeds ``max_nodes``.
    """

    params: PrimeParams
    max_nodes: int | None = None
    _closures: dict[StratumE, frozenset[StratumE]] = field(
        default_factory=dict[StratumE, frozenset[StratumE]], repr=False
    )

    def __post_init__(self) -> None:
        needed = stratum_count(self.params)
        if self.max_nodes is not None and needed > self.max_nodes:
            raise BudgetExceededError(needed, self.max_nodes)

    @cached_property
    def nodes(self) -> list[StratumE]:
        return all_strata(self.params)

    @cached_property
    def successors(self) -> dict[StratumE, frozenset[StratumE]]:
        logger.debug("building |> graph on {} strata", len(self.nodes))
        return {e: rhd_successors(self.params, e) for e in self.nodes}

    @cached_property
    def predecessors(self) -> dict[StratumE, frozenset[StratumE]]:
        back: dict[StratumE, set[StratumE]] = {e: set() for e in self.nodes}
        for src, targets in self.successors.items():
            for dst in targets:
                back[dst].add(src)
        return {e: frozenset(s) for e, s in back.items()}

    def closure(self, e: StratumE) -> frozenset[StratumE]:
        """``{e2 : e |>|> e2}`` by breadth-first search (contains ``e``)."""
        if e not in self._closures:
            self._closures[e] = _bfs(e, self.successors)
        return self._closures[e]

    def reaching(self, target: StratumE) -> frozenset[StratumE]:
        """``{e1 : e1 |>|> target}``."""
        return _bfs(target, self.predecessors)

    def edges(self) -> list[tuple[StratumE, StratumE]]:
        """All one-step edges, sorted; self-loops included."""
        return sorted(
            ((s, t) for s, ts in self.successors.items() for t in ts),
            key=lambda st: (stratum_key(st[0]), stratum_key(st[1])),
        )


def _bfs(
    start: StratumE, adjacency: Mapping[StratumE, frozenset[StratumE]]
) -> frozenset[StratumE]:
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


def rhd_closure(params: PrimeParams, e: StratumE) -> frozenset[StratumE]:
    """``{e2 : e |>|> e2}`` without materializing the whole graph."""
    seen = {e}
    queue = deque([e])
    while queue:
        for nxt in rhd_successors(params, queue.popleft()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Serre weights and multiplicities
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class SerreWeight:
    """``V_{d, a} = (x) det^{d_i} Sym^{a_i - 1}``.

    Attributes:
        d: Twist digits in ``[0, p - 1]``, not all ``p - 1``.
        a: Symmetric-power digits in ``[1, p]``.
        steinberg: ``True`` iff ``a = (p, ..., p)``.
    """

    d: tuple[int, ...]
    a: tuple[int, ...]
    steinberg: bool

    def as_json(self, mult: int) -> dict[str, object]:
        return {
            "d": list(self.d),
            "a": list(self.a),
            "steinberg": self.steinberg,
            "mult": mult,
        }


def _digits(value: int, params: PrimeParams) -> tuple[int, ...]:
    out: list[int] = []
    for _ in range(params.f):
        value, r = divmod(value, params.p)
        out.append(r)
    return tuple(out)


def cyclotomic_ell(params: PrimeParams) -> int:
    """``(p - 2)(q - 1)/(p - 1)``, the exponent with anti-digits ``(1, ..., 1)``."""
    return (params.p - 2) * params.xi // (params.p - 1)


def serre_weight(params: PrimeParams, ell: int, u: int) -> SerreWeight:
    """``V(ell, u)``: ``a`` the anti-digits of ``ell`` and
    ``u = -sum (a_i + d_i) p^i (mod q - 1)``.
    """
    a = digits_of(params, ell % params.xi).a
    return SerreWeight(_digits((ell - u) % params.xi, params), a, False)


def steinberg_weight(params: PrimeParams, u: int) -> SerreWeight:
    """``V(cyclotomic, u)_St`` with ``u = -sum (1 + d_i) p^i (mod q - 1)``."""
    ones = params.xi // (params.p - 1)
    d = _digits((-u - ones) % params.xi, params)
    return SerreWeight(d, (params.p,) * params.f, True)


def multiplicity_witnesses(params: PrimeParams, ell: int, d: StratumD) -> list[FSubset]:
    """The ``J`` with ``(ell, I) >_J d`` for at least one ``I``.

    Every pair ``(J, I)`` is tried; the result lists each qualifying ``J`` once.
    """
    f = params.f
    out = []
    for J in FSubset.all_subsets(f):
        if any(succ_d(params, DPair(ell, I), d, J) for I in FSubset.all_subsets(f)):
            out.append(J)
    return out


def multiplicity(params: PrimeParams, ell: int, d: StratumD) -> int:
    """``m(ell | d)``: the number of ``J`` admitting some ``I`` with
    ``(ell, I) >_J d``.
    """
    return len(multiplicity_witnesses(params, ell, d))


def minimal_supports(
    params: PrimeParams, ell: int, d: StratumD, J: FSubset
) -> list[FSubset]:
    """The inclusion-minimal ``I`` with ``(ell, I) >_J d``, sorted."""
    f = params.f
    hits = [
        I for I in FSubset.all_subsets(f) if succ_d(params, DPair(ell, I), d, J)
    ]
    return [
        I for I in hits if not any(K != I and K.issubset(I) for K in hits)
    ]


def explore_nu_fibers(
    params: PrimeParams, d: DPair
) -> dict[int, dict[FSubset, list[FSubset]]]:
    """Group the ``J`` counted by ``m(ell | d)`` by ``nu(J^{c,1})``.

    Returns:
        For each ``ell`` with ``m(ell | d) > 0``, a map from the image
        ``nu_{ell}^{ell_bar}(J^{c,1})`` to the ``J`` producing it.
    """
    out: dict[int, dict[FSubset, list[FSubset]]] = {}
    for ell in range(params.xi):
        fibers: dict[FSubset, list[FSubset]] = {}
        for J in multiplicity_witnesses(params, ell, d):
            image = nu_image(params, ell, d.ell, J.jc1)
            fibers.setdefault(image, []).append(J)
        if fibers:
            out[ell] = fibers
    return out


def weight_set(
    graph: StrataGraph, e: StratumE
) -> list[tuple[SerreWeight, int]]:
    """The Serre weights of ``e`` with multiplicities, sorted.

    A weight ``V(ell, u)`` is present iff ``(ell, u, F) |>|> e``. Its
    multiplicity is ``m(ell | [[e]])``. The Steinberg weight
    ``V(cyclotomic, u)_St`` is adjoined, with the multiplicity of
    ``V(cyclotomic, u)``, when the latter is present.
    """
    params = graph.params
    full = FSubset.full(params.f)
    target = min(projections(params, e), key=d_key)
    mults: dict[int, int] = {}
    out: dict[SerreWeight, int] = {}
    for src in graph.reaching(e):
        if not isinstance(src, Reducible) or src.iset != full:
            continue
        if src.ell not in mults:
            mults[src.ell] = multiplicity(params, src.ell, target)
        out[serre_weight(params, src.ell, src.u)] = mults[src.ell]
        if src.ell == cyclotomic_ell(params):
            out[steinberg_weight(params, src.u)] = mults[src.ell]
    return sorted(out.items())


def d_universe(params: PrimeParams) -> list[DPair]:
    """All pairs ``(ell, I)``, sorted."""
    return [
        DPair(ell, I)
        for ell in range(params.xi)
        for I in FSubset.all_subsets(params.f)
    ]

