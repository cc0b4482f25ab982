"""Exhaustive checkers for the structural statements about strata.

Each verifier enumerates every instance at a given ``(p, f)`` and returns a
:class:`VerificationReport` listing the instances that fail. An empty list of
counterexamples is the expected outcome. Work is bounded by a budget measured
in ``(q - 1) 4^f`` relation triples; larger instances raise
:class:`BudgetExceededError` before any enumeration starts.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Callable
from dataclasses import dataclass

from loguru import logger

from lt_phigamma.core.arith import PrimeParams
from lt_phigamma.core.combinat import (
    FSubset,
    is_maximal,
    mu,
    mu_start_choices,
    nu,
)
from lt_phigamma.core.errors import BudgetExceededError
from lt_phigamma.core.strata import (
    DClass,
    DPair,
    Irreducible,
    Reducible,
    StrataGraph,
    StratumD,
    StratumE,
    d_key,
    d_universe,
    projections,
    reducible,
    stratum_key,
    stratum_to_json,
    succ_d_targets,
    succ_plus,
    target_ell,
)

DEFAULT_BUDGET = 2_000_000


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one exhaustive check.

    Attributes:
        name: The statement checked.
        params: The prime data.
        checked: Number of instances examined.
        counterexamples: JSON-ready descriptions of failing instances.
    """

    name: str
    params: PrimeParams
    checked: int
    counterexamples: tuple[dict[str, object], ...]

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def as_json(self) -> dict[str, object]:
        return {"checked": self.checked, "counterexamples": list(self.counterexamples)}


def work_estimate(params: PrimeParams) -> int:
    """``(q - 1) 4^f``, the number of ``(ell, I, J)`` triples."""
    return params.xi * 4**params.f


def check_budget(params: PrimeParams, budget: int) -> None:
    """Raise :class:`BudgetExceededError` when the work estimate exceeds ``budget``."""
    needed = work_estimate(params)
    if needed > budget:
        raise BudgetExceededError(needed, budget)


def _d_json(d: StratumD) -> dict[str, object]:
    match d:
        case DPair(ell, iset):
            return {"ell": ell, "I": iset.as_json()}
        case DClass(h):
            return {"h": h}


def _at_most_one_run(J: FSubset) -> bool:
    return len(J.jminus) <= 1


def _relation(
    params: PrimeParams, keep: Callable[[FSubset], bool]
) -> dict[DPair, dict[DPair, list[FSubset]]]:
    """Pair-to-pair part of ``>_J``, restricted to the ``J`` passing ``keep``."""
    rel: dict[DPair, dict[DPair, list[FSubset]]] = {}
    subsets = [J for J in FSubset.all_subsets(params.f) if keep(J)]
    for d1 in d_universe(params):
        targets: dict[DPair, list[FSubset]] = defaultdict(list)
        for J in subsets:
            for d2 in succ_d_targets(params, d1, J):
                if isinstance(d2, DPair):
                    targets[d2].append(J)
        rel[d1] = dict(targets)
    return rel


def _reachable(adjacency: dict[DPair, set[DPair]], start: DPair) -> set[DPair]:
    seen: set[DPair] = set()
    frontier = list(adjacency[start])
    while frontier:
        node = frontier.pop()
        if node not in seen:
            seen.add(node)
            frontier.extend(adjacency[node])
    return seen


# ---------------------------------------------------------------------------
# Chains of >_J
# ---------------------------------------------------------------------------


def verify_tobbu(
    params: PrimeParams, budget: int = DEFAULT_BUDGET
) -> VerificationReport:
    """Decomposition and composition of ``>_J`` on pairs.

    (a) Every ``d1 >_J d2`` with two or more runs in ``J`` is reached by a
    chain of steps ``>_{J_n}`` with at most one run each. (b) The union of
    all ``>_J`` is transitive.
    """
    check_budget(params, budget)
    full = _relation(params, lambda J: True)
    single = _relation(params, _at_most_one_run)
    steps = {d: set(ts) for d, ts in single.items()}
    bad: list[dict[str, object]] = []
    checked = 0
    for d1, targets in full.items():
        reach = _reachable(steps, d1) | {d1}
        for d2, Js in targets.items():
            checked += len(Js)
            for J in Js:
                if not _at_most_one_run(J) and d2 not in reach:
                    bad.append(
                        {"part": "a", "from": _d_json(d1), "to": _d_json(d2),
                         "J": J.as_json()}
                    )
    related = {d: set(ts) for d, ts in full.items()}
    for d1, mids in related.items():
        for d2 in mids:
            checked += 1
            for d3 in sorted(related[d2] - mids):
                bad.append(
                    {"part": "b", "from": _d_json(d1), "via": _d_json(d2),
                     "to": _d_json(d3)}
                )
    logger.debug("tobbu at {}: {} checks", params, checked)
    return VerificationReport("tobbu", params, checked, tuple(bad))


def _one_point_middle(source: DPair, middle: DPair) -> bool:
    """A one-point middle on ``ell_bar = 0`` is only entered from ``ell = 0``."""
    return len(middle.iset) == 1 and (middle.ell != 0 or source.ell == 0)


def verify_ostersa(
    params: PrimeParams, budget: int = DEFAULT_BUDGET
) -> VerificationReport:
    """``(ell, I) >_J [[h]]`` for some ``J`` iff it factors through a
    one-point support ``(ell_bar, {i})`` followed by ``>_K [[h]]`` with ``K``
    an initial or final segment ending or starting at ``i``.

    A middle with ``ell_bar = 0`` only counts when ``ell = 0``: no edge of
    ``|>`` enters ``(0, u, {i})`` from a nonzero ``ell``.
    """
    check_budget(params, budget)
    f = params.f
    subsets = list(FSubset.all_subsets(f))
    via: dict[DPair, set[int]] = {}
    for i in range(f):
        point = FSubset.of(f, [i])
        segments = (FSubset.interval(f, 0, i - 1), FSubset.interval(f, i, f - 1))
        for ell_bar in range(params.xi):
            d = DPair(ell_bar, point)
            hs = via.setdefault(d, set())
            for K in segments:
                for t in succ_d_targets(params, d, K):
                    if isinstance(t, DClass):
                        hs.add(t.h)
    bad: list[dict[str, object]] = []
    checked = 0
    for d1 in d_universe(params):
        direct: set[int] = set()
        for J in subsets:
            for t in succ_d_targets(params, d1, J):
                if isinstance(t, DClass):
                    direct.add(t.h)
        factored: set[int] = set()
        for J in subsets:
            for t in succ_d_targets(params, d1, J):
                if isinstance(t, DPair) and _one_point_middle(d1, t):
                    factored |= via[t]
        checked += params.q + 1
        for h in sorted(direct ^ factored):
            bad.append(
                {"from": _d_json(d1), "h": h, "direct": h in direct,
                 "factored": h in factored}
            )
    return VerificationReport("ostersa", params, checked, tuple(bad))


# ---------------------------------------------------------------------------
# Degeneration versus >_J
# ---------------------------------------------------------------------------


def _u_ambiguity_allowed(params: PrimeParams, target: StratumE, us: list[int]) -> bool:
    """Two ``u`` differing by ``(q - 1)/2`` may reach one target.

    This happens on reducible targets with ``ell_bar = (q - 1)/2``, where
    ``ell_bar = -ell_bar``, and on irreducible targets, where a case (IV)
    detour and a direct one-point degeneration land on the same ``[h]``.
    """
    half = params.xi // 2
    if len(us) != 2 or (us[1] - us[0]) % params.xi != half:
        return False
    match target:
        case Reducible(ell_bar, _, _):
            return ell_bar == half
        case Irreducible():
            return True


def verify_marienmai(
    params: PrimeParams,
    budget: int = DEFAULT_BUDGET,
    graph: StrataGraph | None = None,
) -> VerificationReport:
    """Reachability from ``(ell, u, F)`` against the digit criterion.

    For a reducible target ``(ell_bar, u_bar, I_bar)`` some ``(ell, u, F)``
    reaches it iff ``ell >_J ell_bar`` and ``I_bar`` lies in
    ``nu(J^{c,1})`` for some ``J``; for ``[h]`` iff ``ell >_J^+ h`` for some
    ``J``. In both cases ``u`` is unique modulo ``q - 1``, up to the
    exceptions of :func:`_u_ambiguity_allowed`.

    Two targets are never reached although the criterion holds: a
    reducible ``(0, u_bar, I_bar)`` with ``I_bar`` nonempty from ``ell != 0``,
    and any ``[h]`` from ``ell = 0`` when ``f = 1``. These are excluded from
    the criterion.
    """
    check_budget(params, budget)
    graph = graph or StrataGraph(params)
    f, xi = params.f, params.xi
    full = FSubset.full(f)
    subsets = list(FSubset.all_subsets(f))
    bad: list[dict[str, object]] = []
    checked = 0
    for target in graph.nodes:
        sources: dict[int, list[int]] = defaultdict(list)
        for src in graph.reaching(target):
            if isinstance(src, Reducible) and src.iset == full:
                sources[src.ell].append(src.u)
        expected: set[int] = set()
        for ell in range(xi):
            checked += 1
            for J in subsets:
                if _criterion(params, ell, target, J):
                    expected.add(ell)
                    break
        for ell in sorted(expected ^ set(sources)):
            bad.append(
                {"target": stratum_to_json(target), "ell": ell,
                 "reachable": ell in sources, "criterion": ell in expected}
            )
        for ell, us in sorted(sources.items()):
            us = sorted(set(us))
            if len(us) > 1 and not _u_ambiguity_allowed(params, target, us):
                bad.append(
                    {"target": stratum_to_json(target), "ell": ell, "u": us}
                )
    return VerificationReport("marienmai", params, checked, tuple(bad))


def _criterion(params: PrimeParams, ell: int, target: StratumE, J: FSubset) -> bool:
    match target:
        case Reducible(ell_bar, _, iset_bar):
            if _unlifted_zero(ell, ell_bar, iset_bar):
                return False
            if target_ell(params, ell, J) != ell_bar:
                return False
            image = J.jc1.image(lambda x: nu(params, ell, ell_bar, x))
            return iset_bar.issubset(image)
        case Irreducible(h):
            if ell == 0 and params.f == 1:
                return False
            return succ_plus(params, ell, h, J)


def _unlifted_zero(ell: int, ell_bar: int, iset_bar: FSubset) -> bool:
    """No edge of ``|>`` leaves ``ell != 0`` for ``(0, u_bar, I_bar)`` with
    ``I_bar`` nonempty: the only collapse onto ``ell_bar = 0`` is case (III),
    and it empties the support.
    """
    return ell_bar == 0 and ell != 0 and not iset_bar.is_empty()


def _collapses_to_split(params: PrimeParams, d: DPair) -> bool:
    """Whether ``d`` is a one-point support whose irreducible degeneration is
    replaced by the collapse onto ``(0, u, {})``.
    """
    if len(d.iset) != 1 or d.ell == 0:
        return False
    (x,) = d.iset.members
    return (d.ell + 2 * params.p**x) % params.xi == 0


def _shrinks(params: PrimeParams, e: StratumE) -> frozenset[StratumE]:
    """``e`` together with every case (I) shrink of its support."""
    match e:
        case Reducible(ell, u, iset):
            return frozenset(
                reducible(params, ell, u, s)
                for s in FSubset.all_subsets(params.f)
                if s.issubset(iset)
            )
        case Irreducible():
            return frozenset({e})


def _degeneration_steps(
    params: PrimeParams, graph: StrataGraph
) -> Callable[[StratumE], frozenset[StratumE]]:
    """One edge of ``|>`` with support shrinks allowed before and after it."""
    cache: dict[StratumE, frozenset[StratumE]] = {}

    def step(e: StratumE) -> frozenset[StratumE]:
        if e not in cache:
            cache[e] = frozenset(
                e3
                for e1 in _shrinks(params, e)
                for e2 in graph.successors[e1]
                for e3 in _shrinks(params, e2)
            )
        return cache[e]

    return step


def verify_fernandodrei(
    params: PrimeParams,
    budget: int = DEFAULT_BUDGET,
    graph: StrataGraph | None = None,
) -> VerificationReport:
    """Faithfulness of the projection ``e -> [[e]]``.

    (a) Every edge ``e1 |> e2`` projects to ``[[e1]] >_J [[e2]]`` for some
    ``J`` with at most one run, except the case (III) collapse onto
    ``(0, u, {})``. (b) Each projected relation ``[[e1]] >_J d`` lifts to a
    unique ``e2`` with ``[[e2]] = d``, and each ``d1 >_J [[e2]]`` to a unique
    source ``u``; irreducible targets must be reached at all.

    In (b) a step is one edge of ``|>`` with support shrinks allowed on
    either side, since ``>_J`` lets the target support be any subset. The
    class ``[[0]]`` has no irreducible lift, ``ell = 0`` has no edge to an
    irreducible target, and ``ell != 0`` has none to ``(0, u_bar, I_bar)``
    with ``I_bar`` nonempty, so these are skipped. Two lifts differing by
    ``(q - 1)/2`` in ``u`` are accepted on ``ell_bar = (q - 1)/2``.
    """
    check_budget(params, budget)
    graph = graph or StrataGraph(params)
    f = params.f
    short = [J for J in FSubset.all_subsets(f) if _at_most_one_run(J)]
    step = _degeneration_steps(params, graph)
    down_cache: dict[DPair, frozenset[StratumD]] = {}

    def short_targets(d: DPair) -> frozenset[StratumD]:
        if d not in down_cache:
            down_cache[d] = frozenset(
                t for J in short for t in succ_d_targets(params, d, J)
            )
        return down_cache[d]

    def pairs_of(e: StratumE) -> list[DPair]:
        return [d for d in projections(params, e) if isinstance(d, DPair)]

    def skipped(d1: DPair, d_bar: StratumD) -> bool:
        match d_bar:
            case DClass(h):
                return h == 0 or d1.ell == 0
            case DPair(ell_bar, iset_bar):
                return _unlifted_zero(d1.ell, ell_bar, iset_bar)

    bad: list[dict[str, object]] = []
    checked = 0
    for e1 in graph.nodes:
        if not isinstance(e1, Reducible):
            continue
        sources = pairs_of(e1)
        collapsing = any(_collapses_to_split(params, d) for d in sources)
        below: set[StratumD] = set()
        for d1 in sources:
            below |= short_targets(d1)
        for e2 in graph.successors[e1]:
            checked += 1
            if collapsing and _is_split_zero(e2):
                continue
            if not projections(params, e2) & below:
                bad.append(
                    {"part": "a", "from": stratum_to_json(e1),
                     "to": stratum_to_json(e2)}
                )
        for d1 in sources:
            for d_bar in sorted(short_targets(d1), key=d_key):
                if skipped(d1, d_bar):
                    continue
                checked += 1
                lifts = sorted(
                    (e2 for e2 in step(e1) if d_bar in projections(params, e2)),
                    key=stratum_key,
                )
                if len(lifts) != 1 and not _split_pair(params, lifts):
                    bad.append(
                        {"part": "b-target", "from": stratum_to_json(e1),
                         "projection": _d_json(d_bar), "lifts": len(lifts)}
                    )
    for d1 in d_universe(params):
        candidates = {
            reducible(params, d1.ell, u, d1.iset) for u in range(params.xi)
        }
        down = short_targets(d1)
        for e2 in graph.nodes:
            if isinstance(e2, Irreducible) and d1.ell == 0:
                continue
            if isinstance(e2, Reducible) and _unlifted_zero(d1.ell, e2.ell, e2.iset):
                continue
            if not projections(params, e2) & down:
                continue
            checked += 1
            us = sorted({e1.u for e1 in candidates if e2 in step(e1)})
            if isinstance(e2, Irreducible):
                ok = bool(us)
            else:
                ok = len(us) == 1 or _u_ambiguity_allowed(params, e2, us)
            if not ok:
                bad.append(
                    {"part": "b-source", "from": _d_json(d1),
                     "to": stratum_to_json(e2), "u": us}
                )
    logger.debug("fernandodrei at {}: {} checks", params, checked)
    return VerificationReport("fernandodrei", params, checked, tuple(bad))


def _is_split_zero(e: StratumE) -> bool:
    return isinstance(e, Reducible) and e.ell == 0 and e.iset.is_empty()


def _split_pair(params: PrimeParams, lifts: list[StratumE]) -> bool:
    """Two reducible lifts on ``ell_bar = (q - 1)/2`` whose ``u`` differ by
    ``(q - 1)/2``.
    """
    if len(lifts) != 2:
        return False
    first, second = lifts
    if not isinstance(first, Reducible) or not isinstance(second, Reducible):
        return False
    if first.ell != second.ell or first.iset != second.iset:
        return False
    return _u_ambiguity_allowed(params, first, sorted([first.u, second.u]))


# ---------------------------------------------------------------------------
# Maximal complements
# ---------------------------------------------------------------------------


def verify_goldin(
    params: PrimeParams, budget: int = DEFAULT_BUDGET
) -> VerificationReport:
    """For maximal ``J^c``: ``nu`` is injective on ``J^{c,1}`` and
    ``Pi(nu(J^{c,1}) - 1) = mu(J^c)`` for every admissible start of ``mu``.
    """
    check_budget(params, budget)
    f = params.f
    bad: list[dict[str, object]] = []
    checked = 0
    for ell_t in range(params.xi):
        for J in FSubset.all_subsets(f):
            jc = J.jc
            if not is_maximal(params, ell_t, jc):
                continue
            checked += 1
            ell_b = target_ell(params, ell_t, J)
            values = [nu(params, ell_t, ell_b, x) for x in J.jc1.members]
            image = FSubset.of(f, values)
            shifted = image.shift(-1)
            starts = mu_start_choices(params, ell_b, jc) or [None]
            mus = {mu(params, ell_b, jc, s) for s in starts}
            if len(set(values)) != len(values) or mus != {shifted}:
                bad.append(
                    {"ell_tilde": ell_t, "ell_bar": ell_b, "J": J.as_json(),
                     "nu_shifted": shifted.as_json(),
                     "mu": sorted(m.as_json() for m in mus),
                     "injective": len(set(values)) == len(values)}
                )
    return VerificationReport("goldin", params, checked, tuple(bad))


VERIFIERS: dict[str, Callable[..., VerificationReport]] = {
    "tobbu": verify_tobbu,
    "ostersa": verify_ostersa,
    "marienmai": verify_marienmai,
    "fernandodrei": verify_fernandodrei,
    "goldin": verify_goldin,
}
