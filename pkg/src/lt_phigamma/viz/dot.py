"""DOT output for the ``|>`` graph and for family edges.

Nodes are emitted in :func:`~lt_phigamma.core.strata.stratum_key` order and
edges in (source, target) order, so the text is stable across runs. Reducible
strata are boxes, irreducible ones ellipses; self-loops are dropped.
"""

from __future__ import annotations

from collections.abc import Iterable

from lt_phigamma.core.families import FamilyEdge
from lt_phigamma.core.strata import (
    Irreducible,
    Reducible,
    StrataGraph,
    StratumE,
    stratum_key,
)


def stratum_label(e: StratumE) -> str:
    """``(ell,u,{i,...})`` or ``[h]``."""
    match e:
        case Reducible(ell, u, iset):
            members = ",".join(str(i) for i in iset.members)
            return f"({ell},{u},{{{members}}})"
        case Irreducible(h):
            return f"[{h}]"


def _node(e: StratumE) -> str:
    shape = "box" if isinstance(e, Reducible) else "ellipse"
    return f'\t"{stratum_label(e)}" [shape={shape}];'


def _render(
    name: str,
    nodes: Iterable[StratumE],
    edges: Iterable[tuple[StratumE, StratumE, str]],
) -> str:
    lines = [f"digraph {name} {{", "\trankdir=TB;"]
    lines += [_node(e) for e in sorted(set(nodes), key=stratum_key)]
    for src, dst, label in edges:
        if src == dst:
            continue
        attrs = f' [label="{label}"]' if label else ""
        lines.append(f'\t"{stratum_label(src)}" -> "{stratum_label(dst)}"{attrs};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def rhd_dot(graph: StrataGraph) -> str:
    """The one-step degeneration graph on every stratum."""
    edges = [(s, t, "") for s, t in graph.edges()]
    return _render("rhd", graph.nodes, edges)


def family_edges_dot(edges: Iterable[FamilyEdge]) -> str:
    """Family edges, labelled by construction and indices."""
    edge_list = sorted(
        edges,
        key=lambda e: (stratum_key(e.source), stratum_key(e.target), e.indices),
    )
    nodes = [e.source for e in edge_list] + [e.target for e in edge_list]
    labelled = [
        (e.source, e.target, f"{e.kind}{list(e.indices)}") for e in edge_list
    ]
    return _render("families", nodes, labelled)
