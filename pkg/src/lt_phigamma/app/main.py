"""The ``ltpg`` command line.

Every command writes one payload to stdout: compact JSON with sorted keys,
DOT, or a rich table. Diagnostics go to stderr through loguru. Exit codes are
``0`` on success, ``1`` when a check finds a counterexample, ``2`` on a usage
error and ``3`` when an enumeration exceeds its budget.
"""

from __future__ import annotations

import json
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from enum import IntEnum, StrEnum
from typing import Annotated

import typer
from loguru import logger
from rich.console import Console
from rich.table import Table

from lt_phigamma.app.config import OutputFormat, RunConfig
from lt_phigamma.core.arith import PrimeParams, witt_make
from lt_phigamma.core.combinat import (
    FSubset,
    de_split,
    digits_of,
    mu,
    mu_start_choices,
    nu_map,
)
from lt_phigamma.core.errors import BudgetExceededError
from lt_phigamma.core.exponents import exponent_report
from lt_phigamma.core.families import (
    FamilySpec,
    family_change_ell,
    family_edges_report,
    family_fiber,
    family_report,
    family_to_irreducible,
    rhd_edges_from_families,
)
from lt_phigamma.core.lubin_tate import (
    GammaKind,
    IdentityCheck,
    composition_law_holds,
    default_precision,
    gamma_sampler,
    lt_coeffs,
    lt_verify_identities,
)
from lt_phigamma.core.oracle import delta_oracle, gamma_check, standard_gammas
from lt_phigamma.core.presentation import (
    Presentation,
    phi_matrix,
    presentation_from_json,
    presentation_to_json,
    stratum_of,
)
from lt_phigamma.core.strata import (
    DPair,
    StrataGraph,
    StratumD,
    StratumE,
    d_class,
    explore_nu_fibers,
    irreducible,
    multiplicity_witnesses,
    reducible,
    stratum_to_json,
    weight_set,
)
from lt_phigamma.core.verifiers import (
    verify_fernandodrei,
    verify_goldin,
    verify_marienmai,
    verify_ostersa,
    verify_tobbu,
)
from lt_phigamma.viz.dot import family_edges_dot, rhd_dot

app = typer.Typer(
    help="Lubin-Tate (phi, Gamma)-modules, strata and degeneration families.",
    no_args_is_help=True,
    add_completion=False,
)
lt_app = typer.Typer(help="Lubin-Tate series coefficients.", no_args_is_help=True)
combinat_app = typer.Typer(help="Digit combinatorics.", no_args_is_help=True)
strata_app = typer.Typer(help="Strata, |> and Serre weights.", no_args_is_help=True)
phigamma_app = typer.Typer(help="Presentations and phi-matrices.", no_args_is_help=True)
families_app = typer.Typer(help="Degeneration families.", no_args_is_help=True)
app.add_typer(lt_app, name="lt")
app.add_typer(combinat_app, name="combinat")
app.add_typer(strata_app, name="strata")
app.add_typer(phigamma_app, name="phigamma")
app.add_typer(families_app, name="families")

err_console = Console(stderr=True)


class ExitCode(IntEnum):
    OK = 0
    COUNTEREXAMPLE = 1
    USAGE = 2
    BUDGET = 3


class VerifierName(StrEnum):
    """Exhaustive checks reachable from ``verify`` and ``strata verify``."""

    TOBBU = "tobbu"
    OSTERSA = "ostersa"
    MARIENMAI = "marienmai"
    FERNANDODREI = "fernandodrei"
    GOLDIN = "goldin"
    EXPONENTS = "exponents"
    FAMILIES = "families"
    FAMILY_EDGES = "family-edges"


class FamilyChoice(StrEnum):
    IRREDUCIBLE = "irreducible"
    CHANGE = "change"


P = Annotated[int, typer.Option("--p", help="An odd prime.")]
F = Annotated[int, typer.Option("--f", help="Residue degree, q = p^f.")]
Degree = Annotated[int, typer.Option("--e", help="Coefficient field degree over F_q.")]
Format = Annotated[
    OutputFormat, typer.Option("--format", help="Payload format on stdout.")
]
Seed = Annotated[int, typer.Option("--seed", help="Seed for sampled tests.")]
ISet = Annotated[
    str, typer.Option("--iset", help="Comma-separated indices in [0, f-1].")
]
Params = Annotated[
    str, typer.Option("--params", help="Presentation as JSON (see matrix).")
]


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------


@app.callback()
def main(
    verbose: Annotated[
        bool, typer.Option("--verbose", "-v", help="Log debug output to stderr.")
    ] = False,
) -> None:
    """Configure logging for every subcommand."""
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "WARNING")
    logger.enable("lt_phigamma")


@contextmanager
def _handled() -> Iterator[None]:
    """Translate library errors into exit codes."""
    try:
        yield
    except BudgetExceededError as exc:
        err_console.print(f"[red]budget exceeded:[/red] {exc}")
        raise typer.Exit(ExitCode.BUDGET) from exc
    except ValueError as exc:
        err_console.print(f"[red]error:[/red] {exc}")
        raise typer.Exit(ExitCode.USAGE) from exc


def _config(
    p: int,
    f: int,
    e: int = 1,
    output: OutputFormat = OutputFormat.JSON,
    seed: int = 0,
) -> RunConfig:
    with _handled():
        return RunConfig.from_env(p, f, e, output=output, seed=seed)


def dumps(payload: object) -> str:
    """The canonical JSON text of a payload."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _emit(payload: dict[str, object], output: OutputFormat = OutputFormat.JSON) -> None:
    if output is OutputFormat.TABLE:
        table = Table(show_header=True)
        table.add_column("key")
        table.add_column("value")
        for key in sorted(payload):
            table.add_row(key, dumps(payload[key]))
        Console().print(table)
        return
    typer.echo(dumps(payload))


def _finish(ok: bool) -> None:
    if not ok:
        raise typer.Exit(ExitCode.COUNTEREXAMPLE)


def _subset(params: PrimeParams, text: str) -> FSubset:
    text = text.strip()
    if not text:
        return FSubset.empty(params.f)
    try:
        members = [int(x) for x in text.split(",")]
    except ValueError:
        raise typer.BadParameter(f"not a list of integers: {text!r}") from None
    if any(not 0 <= x < params.f for x in members):
        raise typer.BadParameter(f"indices must lie in [0, {params.f - 1}]")
    return FSubset.of(params.f, members)


def _presentation(params: PrimeParams, text: str) -> Presentation:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise typer.BadParameter(f"--params is not JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise typer.BadParameter("--params must be a JSON object")
    with _handled():
        return presentation_from_json(params, data)


def _stratum(
    params: PrimeParams, ell: int | None, u: int, iset: str, h: int | None
) -> StratumE:
    if (ell is None) == (h is None):
        raise typer.BadParameter("give exactly one of --ell and --h")
    with _handled():
        if h is not None:
            return irreducible(params, h)
        assert ell is not None
        return reducible(params, ell, u, _subset(params, iset))


# ---------------------------------------------------------------------------
# lt
# ---------------------------------------------------------------------------


@lt_app.command("coeffs")
def lt_coeffs_cmd(
    p: P,
    f: F,
    gamma: Annotated[int, typer.Option("--gamma", help="A unit of Z_p.")],
    bound: Annotated[int, typer.Option("--bound", help="Largest index.")],
    prec: Annotated[
        int | None, typer.Option("--prec", help="p-adic precision K.")
    ] = None,
) -> None:
    """Coefficients ``a_n`` of ``[gamma](t)``; zero coefficients are omitted."""
    cfg = _config(p, f)
    params = cfg.params
    with _handled():
        K = prec if prec is not None else default_precision(params.q, bound)
        ring = witt_make(p, f, K)
        series = lt_coeffs(ring, ring.from_int(gamma), bound)
    payload: dict[str, object] = {
        str(n): list(series.coeffs[n].coeffs)
        for n in series.indices()
        if any(series.coeffs[n].coeffs)
    }
    _emit(payload)


@lt_app.command("verify")
def lt_verify_cmd(
    p: P,
    f: F,
    count: Annotated[int, typer.Option("--count", help="Units per kind.")] = 2,
    seed: Seed = 0,
    output: Format = OutputFormat.JSON,
) -> None:
    """Coefficient identities and the composition law for sampled units."""
    cfg = _config(p, f, output=output, seed=seed)
    q = cfg.params.q
    with _handled():
        ring = witt_make(p, f, default_precision(q, 2 * q * q))
        units = [
            *gamma_sampler(ring, count, GammaKind.RANDOM, cfg.seed),
            *gamma_sampler(ring, count, GammaKind.TEICHMULLER, cfg.seed),
        ]
        report = lt_verify_identities(ring, units)
        checks = list(report.checks)
        for g, h in zip(units, units[1:], strict=False):
            holds = composition_law_holds(ring, g, h, 2 * q)
            checks.append(IdentityCheck("composition", g.coeffs + h.coeffs, holds))
    counts: dict[str, int] = {}
    for c in checks:
        counts[c.identity] = counts.get(c.identity, 0) + 1
    bad = [
        {"identity": c.identity, "gamma": list(c.gamma)}
        for c in checks
        if not c.passed
    ]
    _emit({"checked": len(checks), "counts": counts, "counterexamples": bad}, output)
    _finish(not bad)


# ---------------------------------------------------------------------------
# combinat
# ---------------------------------------------------------------------------


@combinat_app.command("digits")
def combinat_digits(p: P, f: F, ell: Annotated[int, typer.Option("--ell")]) -> None:
    """Standard digits ``m`` and anti-digits ``a`` of ``ell``."""
    params = _config(p, f).params
    with _handled():
        d = digits_of(params, ell)
    _emit({"ell": ell, "m": list(d.m), "a": list(d.a)})


@combinat_app.command("de")
def combinat_de(p: P, f: F, ell: Annotated[int, typer.Option("--ell")]) -> None:
    """The split ``F = D(ell) + E(ell)``."""
    params = _config(p, f).params
    with _handled():
        D, E_ = de_split(params, ell)
    _emit({"ell": ell, "D": D.as_json(), "E": E_.as_json()})


@combinat_app.command("nu")
def combinat_nu(
    p: P,
    f: F,
    ell_tilde: Annotated[int, typer.Option("--ell-tilde")],
    ell_bar: Annotated[int, typer.Option("--ell-bar")],
) -> None:
    """The map ``nu`` from ``ell_tilde`` to ``ell_bar`` on ``F``."""
    params = _config(p, f).params
    with _handled():
        values = nu_map(params, ell_tilde, ell_bar)
    _emit({"nu": list(values)})


@combinat_app.command("mu")
def combinat_mu(
    p: P,
    f: F,
    ell_bar: Annotated[int, typer.Option("--ell-bar")],
    jc: Annotated[str, typer.Option("--jc", help="Comma-separated J^c.")],
    start: Annotated[int | None, typer.Option("--start")] = None,
) -> None:
    """The re-indexed set ``mu(J^c)`` and its admissible starts."""
    params = _config(p, f).params
    subset = _subset(params, jc)
    with _handled():
        starts = mu_start_choices(params, ell_bar, subset)
        value = mu(params, ell_bar, subset, start)
    _emit({"mu": value.as_json(), "starts": starts})


# ---------------------------------------------------------------------------
# strata
# ---------------------------------------------------------------------------


def _graph(cfg: RunConfig) -> StrataGraph:
    with _handled():
        return StrataGraph(cfg.params, max_nodes=cfg.max_nodes)


@strata_app.command("graph")
def strata_graph(
    p: P,
    f: F,
    dot: Annotated[bool, typer.Option("--dot", help="Emit DOT.")] = False,
) -> None:
    """The one-step degeneration graph on all strata."""
    graph = _graph(_config(p, f))
    if dot:
        typer.echo(rhd_dot(graph), nl=False)
        return
    _emit(
        {
            "nodes": [stratum_to_json(e) for e in graph.nodes],
            "edges": [
                [stratum_to_json(s), stratum_to_json(t)] for s, t in graph.edges()
            ],
        }
    )


@strata_app.command("weights")
def strata_weights(
    p: P,
    f: F,
    ell: Annotated[int | None, typer.Option("--ell")] = None,
    u: Annotated[int, typer.Option("--u")] = 0,
    iset: ISet = "",
    h: Annotated[int | None, typer.Option("--h")] = None,
    output: Format = OutputFormat.JSON,
) -> None:
    """Serre weights of a stratum with multiplicities."""
    cfg = _config(p, f, output=output)
    e = _stratum(cfg.params, ell, u, iset, h)
    graph = _graph(cfg)
    weights = weight_set(graph, e)
    _emit(
        {"stratum": stratum_to_json(e), "weights": [w.as_json(m) for w, m in weights]},
        output,
    )


def _d_stratum(
    params: PrimeParams, d_ell: int | None, iset: str, h: int | None
) -> StratumD:
    if (d_ell is None) == (h is None):
        raise typer.BadParameter("give exactly one of --d-ell and --h")
    if h is not None:
        return d_class(params, h)
    assert d_ell is not None
    if not 0 <= d_ell < params.xi:
        raise typer.BadParameter(f"--d-ell must lie in [0, {params.xi - 1}]")
    return DPair(d_ell, _subset(params, iset))


@strata_app.command("mult")
def strata_mult(
    p: P,
    f: F,
    ell: Annotated[int, typer.Option("--ell")],
    d_ell: Annotated[int | None, typer.Option("--d-ell")] = None,
    iset: ISet = "",
    h: Annotated[int | None, typer.Option("--h")] = None,
) -> None:
    """``m(ell | d)`` with the witnessing ``J``."""
    params = _config(p, f).params
    d = _d_stratum(params, d_ell, iset, h)
    with _handled():
        witnesses = multiplicity_witnesses(params, ell, d)
    _emit({"mult": len(witnesses), "witnesses": [J.as_json() for J in witnesses]})


@strata_app.command("explore-nu-fibers")
def strata_explore(
    p: P,
    f: F,
    d_ell: Annotated[int, typer.Option("--d-ell")],
    iset: ISet = "",
) -> None:
    """Group the ``J`` counted by ``m(ell | d)`` by ``nu(J^{c,1})``."""
    params = _config(p, f).params
    d = _d_stratum(params, d_ell, iset, None)
    assert isinstance(d, DPair)
    fibers = explore_nu_fibers(params, d)
    rows: list[dict[str, object]] = [
        {"ell": ell, "image": image.as_json(), "J": [J.as_json() for J in js]}
        for ell, by_image in sorted(fibers.items())
        for image, js in sorted(by_image.items(), key=lambda kv: kv[0].mask)
    ]
    _emit({"fibers": rows})


def _run_verifier(name: VerifierName, cfg: RunConfig) -> tuple[bool, dict[str, object]]:
    params, budget = cfg.params, cfg.budget
    match name:
        case VerifierName.TOBBU:
            report = verify_tobbu(params, budget)
        case VerifierName.OSTERSA:
            report = verify_ostersa(params, budget)
        case VerifierName.MARIENMAI:
            report = verify_marienmai(params, budget, _graph(cfg))
        case VerifierName.FERNANDODREI:
            report = verify_fernandodrei(params, budget, _graph(cfg))
        case VerifierName.GOLDIN:
            report = verify_goldin(params, budget)
        case VerifierName.EXPONENTS:
            exp = exponent_report(params)
            return exp.ok, exp.as_json()
        case VerifierName.FAMILIES:
            report = family_report(params, budget)
        case VerifierName.FAMILY_EDGES:
            report = family_edges_report(params, budget)
    return report.ok, report.as_json()


def _verify(name: VerifierName, p: int, f: int, output: OutputFormat) -> None:
    cfg = _config(p, f, output=output)
    with _handled():
        ok, payload = _run_verifier(name, cfg)
    logger.info("verify {} p={} f={} ok={}", name, p, f, ok)
    _emit(payload, output)
    _finish(ok)


@strata_app.command("verify")
def strata_verify(
    name: Annotated[VerifierName, typer.Argument(help="The statement to check.")],
    p: P,
    f: F,
    output: Format = OutputFormat.JSON,
) -> None:
    """Run one exhaustive verifier."""
    _verify(name, p, f, output)


@app.command("verify")
def verify(
    name: Annotated[VerifierName, typer.Argument(help="The statement to check.")],
    p: P,
    f: F,
    output: Format = OutputFormat.JSON,
) -> None:
    """Run one exhaustive verifier (same as ``strata verify``)."""
    _verify(name, p, f, output)


# ---------------------------------------------------------------------------
# phigamma
# ---------------------------------------------------------------------------


@phigamma_app.command("matrix")
def phigamma_matrix(p: P, f: F, params: Params, e: Degree = 1) -> None:
    """The phi-matrix of a presentation on its dual basis."""
    pres = _presentation(_config(p, f, e).params, params)
    with _handled():
        matrix = phi_matrix(pres)
    _emit(matrix.as_json())


@phigamma_app.command("classify")
def phigamma_classify(p: P, f: F, params: Params, e: Degree = 1) -> None:
    """The stratum of a presentation."""
    pres = _presentation(_config(p, f, e).params, params)
    with _handled():
        e_ = stratum_of(pres)
    _emit({"stratum": stratum_to_json(e_)})


@phigamma_app.command("oracle")
def phigamma_oracle(
    p: P,
    f: F,
    params: Params,
    e: Degree = 1,
    phi_depth: Annotated[int | None, typer.Option("--phi-depth")] = None,
    t_depth: Annotated[int | None, typer.Option("--depth")] = None,
) -> None:
    """Recompute the phi-matrix from the quotient and compare."""
    pres = _presentation(_config(p, f, e).params, params)
    with _handled():
        result = delta_oracle(pres, phi_depth=phi_depth, t_depth=t_depth)
        agrees = result.agrees_with(phi_matrix(pres))
    _emit({"agrees": agrees, **result.as_json()})
    _finish(agrees)


@phigamma_app.command("gamma-check")
def phigamma_gamma_check(
    p: P,
    f: F,
    params: Params,
    e: Degree = 1,
    count: Annotated[int, typer.Option("--count", help="Units per kind.")] = 1,
    seed: Seed = 0,
) -> None:
    """Check that sampled ``gamma`` preserve the relations."""
    cfg = _config(p, f, e, seed=seed)
    pres = _presentation(cfg.params, params)
    with _handled():
        report = gamma_check(pres, standard_gammas(pres, count, cfg.seed))
    _emit(report.as_json())
    _finish(report.ok)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


def _alphas(text: str) -> dict[int, int]:
    if not text:
        return {}
    try:
        raw = json.loads(text)
        return {int(k): int(v) for k, v in raw.items()}
    except (json.JSONDecodeError, AttributeError, TypeError, ValueError) as exc:
        raise typer.BadParameter(f"--alphas must map indices to ints: {exc}") from exc


def _family(
    params: PrimeParams,
    kind: FamilyChoice,
    ell: int,
    u: int,
    i: int | None,
    i1: int | None,
    i2: int | None,
    iset: str,
    alphas: str,
) -> FamilySpec:
    with _handled():
        if kind is FamilyChoice.IRREDUCIBLE:
            if i is None:
                raise typer.BadParameter("--i is required for irreducible families")
            return family_to_irreducible(params, ell, u, i)
        if i1 is None or i2 is None:
            raise typer.BadParameter("--i1 and --i2 are required")
        subset = _subset(params, iset) if iset else FSubset.of(params.f, [i1, i2])
        return family_change_ell(
            params, ell, u, subset, i1, i2, alphas=_alphas(alphas)
        )


Kind = Annotated[FamilyChoice, typer.Option("--kind")]
Ell = Annotated[int, typer.Option("--ell", help="The source exponent.")]
U = Annotated[int, typer.Option("--u", help="The source twist.")]
Index = Annotated[int | None, typer.Option("--i")]
I1 = Annotated[int | None, typer.Option("--i1")]
I2 = Annotated[int | None, typer.Option("--i2")]
Alphas = Annotated[str, typer.Option("--alphas", help='JSON like {"5": 2}.')]


@families_app.command("spec")
def families_spec(
    p: P,
    f: F,
    kind: Kind,
    ell: Ell,
    u: U = 0,
    i: Index = None,
    i1: I1 = None,
    i2: I2 = None,
    iset: ISet = "",
    alphas: Alphas = "",
) -> None:
    """Parameters, polynomials, checks and target of one family."""
    params = _config(p, f).params
    spec = _family(params, kind, ell, u, i, i1, i2, iset, alphas)
    _emit(spec.as_json())


@families_app.command("fiber")
def families_fiber(
    p: P,
    f: F,
    kind: Kind,
    ell: Ell,
    tau: Annotated[int, typer.Option("--tau", help="A field element.")],
    u: U = 0,
    i: Index = None,
    i1: I1 = None,
    i2: I2 = None,
    iset: ISet = "",
    alphas: Alphas = "",
) -> None:
    """The presentation of one fibre and its stratum."""
    params = _config(p, f).params
    spec = _family(params, kind, ell, u, i, i1, i2, iset, alphas)
    with _handled():
        fiber = family_fiber(spec, tau)
        stratum = stratum_of(fiber)
    _emit(
        {
            "presentation": presentation_to_json(fiber),
            "stratum": stratum_to_json(stratum),
            "source": stratum_to_json(spec.source),
            "target": stratum_to_json(spec.target),
        }
    )


@families_app.command("edges")
def families_edges(
    p: P,
    f: F,
    dot: Annotated[bool, typer.Option("--dot", help="Emit DOT.")] = False,
) -> None:
    """Every family edge, cross-checked against ``|>``."""
    cfg = _config(p, f)
    with _handled():
        edges = rhd_edges_from_families(cfg.params)
        if dot:
            typer.echo(family_edges_dot(edges), nl=False)
            return
        report = family_edges_report(cfg.params, cfg.budget)
    _emit({"edges": [edge.as_json() for edge in edges], "report": report.as_json()})
    _finish(report.ok)
