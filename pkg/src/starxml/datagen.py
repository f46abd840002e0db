"""Deterministic synthetic warehouse generation for tests and benchmarks.

Generated warehouses mirror a retail sales shape: uniform dimensions with
column-like attributes, and fact cells that reference one uniformly
random node per dimension.  Everything is a pure function of the spec, so
equal specs produce structurally equal warehouses and byte-identical
documents.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from decimal import Decimal

from .model import (
    AttributeKV,
    Dimension,
    DimensionNode,
    DimensionRef,
    FactCell,
    Measure,
    Warehouse,
)

SALES_DIMENSION_NAMES = ("channels", "promotions", "customers", "products", "times")

# Attribute values are drawn from a pool this size at most, so equality
# predicates select non-trivial node subsets.
_MAX_VALUE_POOL = 16


@dataclass(frozen=True, slots=True)
class GenSpec:
    """Cardinalities and seed for one generated warehouse."""

    dimension_count: int
    nodes_per_dimension: int
    attrs_per_node: int
    cell_count: int
    measures_per_cell: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in (
            "dimension_count",
            "nodes_per_dimension",
            "attrs_per_node",
            "cell_count",
            "measures_per_cell",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.cell_count > 0:
            # Cells need at least one reference target and one measure.
            if self.dimension_count < 1 or self.nodes_per_dimension < 1:
                raise ValueError(
                    "cell_count > 0 requires at least one dimension with nodes"
                )
            if self.measures_per_cell < 1:
                raise ValueError("cell_count > 0 requires measures_per_cell >= 1")


def dimension_names(count: int) -> tuple[str, ...]:
    """`dim0..dimN-1`, or the five sales names when the count is five."""
    if count == 5:
        return SALES_DIMENSION_NAMES
    return tuple(f"dim{k}" for k in range(count))


def generate(spec: GenSpec) -> Warehouse:
    """Generate a warehouse with exactly the spec's cardinalities.

    Node ids are ``dim<K>_n<J>`` and attribute names ``attr<K>_<I>`` with
    values ``v0..v{pool-1}``; measures ``m0..`` carry small integers.  The
    result always passes :func:`starxml.model.validate`.
    """
    rng = random.Random(spec.seed)
    names = dimension_names(spec.dimension_count)
    pool = max(1, min(spec.nodes_per_dimension, _MAX_VALUE_POOL))

    dimensions = []
    for k, name in enumerate(names):
        nodes = []
        for j in range(spec.nodes_per_dimension):
            attrs = tuple(
                AttributeKV(f"attr{k}_{i}", f"v{rng.randrange(pool)}")
                for i in range(spec.attrs_per_node)
            )
            nodes.append(DimensionNode(f"dim{k}_n{j}", attrs))
        dimensions.append(Dimension(name, tuple(nodes)))

    cells = []
    for _ in range(spec.cell_count):
        measures = tuple(
            Measure(f"m{i}", Decimal(rng.randint(1, 50)))
            for i in range(spec.measures_per_cell)
        )
        refs = tuple(
            DimensionRef(names[k], f"dim{k}_n{rng.randrange(spec.nodes_per_dimension)}")
            for k in range(spec.dimension_count)
        )
        cells.append(FactCell(measures, refs))

    return Warehouse(tuple(dimensions), tuple(cells))
