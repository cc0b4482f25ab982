"""Graphviz renderings of degeneration graphs."""

from lt_phigamma.viz.dot import family_edges_dot, rhd_dot, stratum_label

__all__ = ["family_edges_dot", "rhd_dot", "stratum_label"]
