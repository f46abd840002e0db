"""Join-index materialization.

Building the index migrates every referenced dimension node's attributes
into the owning fact cell, so query evaluation over the index never joins
back to the dimension document.  Attribute lists are copied per cell, not
shared: the space overhead of full denormalization is the price of the
join-free structure and the serialized form is always fully expanded.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .model import (
    AttributeKV,
    DimensionNode,
    IndexCell,
    IndexDimension,
    JoinIndex,
    ValidationReport,
    Warehouse,
    validate,
)


class InvalidWarehouseError(Exception):
    """Raised when an operation requires a warehouse that fails validation."""

    def __init__(self, report: ValidationReport):
        lines = "; ".join(f"{v.locator}: {v.message}" for v in report.violations[:5])
        extra = len(report.violations) - 5
        if extra > 0:
            lines += f"; and {extra} more"
        super().__init__(f"warehouse is invalid: {lines}")
        self.report = report


def build_index(warehouse: Warehouse) -> JoinIndex:
    """Materialize the join index for a valid warehouse.

    Produces one index cell per fact cell, in order.  Measures are carried
    over verbatim; each dimension reference becomes an entry holding the
    resolved node's attributes as a fresh copy.

    Raises :class:`InvalidWarehouseError` (with the validation report
    attached) when the warehouse has any violation, since dangling
    references cannot be migrated.
    """
    report = validate(warehouse)
    if not report.ok:
        raise InvalidWarehouseError(report)

    nodes_by_key: dict[tuple[str, str], DimensionNode] = {}
    for dim in warehouse.dimensions:
        for node in dim.nodes:
            nodes_by_key[(dim.name, node.id)] = node

    cells = []
    for cell in warehouse.cells:
        entries = []
        for ref in cell.dimension_refs:
            node = nodes_by_key[(ref.dimension_name, ref.node_id)]
            copied = tuple(AttributeKV(a.name, a.value) for a in node.attributes)
            entries.append(IndexDimension(ref.dimension_name, ref.node_id, copied))
        cells.append(IndexCell(cell.measures, tuple(entries)))
    return JoinIndex(tuple(cells))


@dataclass(frozen=True, slots=True)
class IndexStats:
    """Shape summary of a join index.

    ``entries_per_cell`` maps a dimension-entry count to the number of
    cells having it; ``attributes_per_entry`` maps an attribute count to
    the number of dimension entries having it.
    """

    cell_count: int
    entries_per_cell: dict[int, int]
    attributes_per_entry: dict[int, int]


def index_stats(index: JoinIndex) -> IndexStats:
    """Exact cardinality distributions of an index."""
    entries_per_cell: Counter[int] = Counter()
    attributes_per_entry: Counter[int] = Counter()
    for cell in index.cells:
        entries_per_cell[len(cell.dimensions)] += 1
        for entry in cell.dimensions:
            attributes_per_entry[len(entry.attributes)] += 1
    return IndexStats(len(index.cells), dict(entries_per_cell), dict(attributes_per_entry))
