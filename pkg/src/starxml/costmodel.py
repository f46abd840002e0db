"""Analytical traversal-cost model for the two query-execution paths.

Costs are dimensionless node-visit counts, not seconds.  With ``c`` fact
cells, ``D`` dimensions, ``n`` nodes per dimension, and ``a`` attributes
per node:

* without the index, every cell pays the dimension traversal again, so
  the cost is ``(c * D) * (D + n * a)``;
* with the index, one scan of the self-contained cells suffices:
  ``c * (D + a)``.

Both are linear in the cell count, so their quotient, the gain ratio
``D * (D + n * a) / (D + a)``, does not depend on it.  The gain is exact
rational arithmetic; it is undefined when the indexed cost is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from statistics import fmean
from typing import Iterable

from .model import Warehouse

COST_CSV_HEADER = (
    "cells,dimensions,nodes_per_dim,attrs_per_node,"
    "cost_without_index,cost_with_index,gain"
)


@dataclass(frozen=True, slots=True)
class CostParams:
    """The four cardinalities driving the cost formulas.

    Heterogeneous warehouses are summarized by per-dimension means (see
    :func:`params_from_warehouse`); the formulas themselves take uniform
    values.
    """

    cell_count: int
    dimension_count: int
    nodes_per_dimension: int
    attrs_per_node: int

    def __post_init__(self) -> None:
        for name in ("cell_count", "dimension_count", "nodes_per_dimension", "attrs_per_node"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True, slots=True)
class CostEstimate:
    """Both path costs plus their ratio; ``gain`` is None when undefined."""

    without_index: int
    with_index: int
    gain: Fraction | None


def cost_without_index(params: CostParams) -> int:
    """Traversal cost of the explicit-join path."""
    return (params.cell_count * params.dimension_count) * (
        params.dimension_count
        + params.nodes_per_dimension * params.attrs_per_node
    )


def cost_with_index(params: CostParams) -> int:
    """Traversal cost of the index-scan path."""
    return params.cell_count * (params.dimension_count + params.attrs_per_node)


def gain_ratio(params: CostParams) -> Fraction | None:
    """Exact ratio of the two costs, or None when the indexed cost is zero."""
    indexed = cost_with_index(params)
    if indexed == 0:
        return None
    return Fraction(cost_without_index(params), indexed)


def estimate(params: CostParams) -> CostEstimate:
    return CostEstimate(cost_without_index(params), cost_with_index(params), gain_ratio(params))


def cost_sweep(params_list: Iterable[CostParams]) -> list[tuple[CostParams, CostEstimate]]:
    """Evaluate the model over a parameter list, one row per entry."""
    return [(p, estimate(p)) for p in params_list]


def format_gain(gain: Fraction | None) -> str:
    """Render a gain for CSV output: six decimals, empty when undefined."""
    if gain is None:
        return ""
    return f"{float(gain):.6f}"


def params_from_warehouse(warehouse: Warehouse) -> CostParams:
    """Summarize a warehouse's cardinalities as cost-model parameters.

    ``nodes_per_dimension`` is the mean node count over dimensions and
    ``attrs_per_node`` the mean over dimensions of each dimension's mean
    per-node attribute count, both rounded to the nearest integer.
    """
    dimensions = warehouse.dimensions
    if not dimensions:
        return CostParams(len(warehouse.cells), 0, 0, 0)
    node_counts = [len(d.nodes) for d in dimensions]
    attr_means = [
        fmean(len(n.attributes) for n in d.nodes) if d.nodes else 0.0
        for d in dimensions
    ]
    return CostParams(
        cell_count=len(warehouse.cells),
        dimension_count=len(dimensions),
        nodes_per_dimension=round(fmean(node_counts)),
        attrs_per_node=round(fmean(attr_means)),
    )
