"""Upper-tail workbench for subgraph counts in G(n, p)."""

__version__ = "0.1.0"
