"""In-memory model of a star-schema XML warehouse and its join index.

A warehouse is split across two documents: ``Dimensions.xml`` holds the
dimension members with their descriptive attributes, ``TableFacts.xml``
holds the fact cells (measure values plus one key reference per
dimension).  The join index denormalizes the two: each index cell carries
the facts together with a private copy of every referenced node's
attributes, so queries over the index never touch the dimension document.

All types are immutable after construction and safe to share between
threads.  Structural problems are reported by :func:`validate` as data,
never raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, NamedTuple


class AttributeKV(NamedTuple):
    """One descriptive attribute of a dimension node, as raw document text."""

    name: str
    value: str


class DimensionRef(NamedTuple):
    """Foreign-key reference from a fact cell to one dimension node."""

    dimension_name: str
    node_id: str


class Measure(NamedTuple):
    """One named measure value of a fact cell."""

    id: str
    value: Decimal


class IndexDimension(NamedTuple):
    """Denormalized dimension entry of an index cell.

    Carries the resolved reference plus a copy of the node's attributes,
    making the entry self-contained.
    """

    dimension_name: str
    node_id: str
    attributes: tuple[AttributeKV, ...]


@dataclass(frozen=True, slots=True)
class DimensionNode:
    """One keyed member of a dimension; the target of fact-cell references."""

    id: str
    attributes: tuple[AttributeKV, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))


@dataclass(frozen=True, slots=True)
class Dimension:
    """A named dimension with its ordered member nodes."""

    name: str
    nodes: tuple[DimensionNode, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))


@dataclass(frozen=True, slots=True)
class FactCell:
    """One fact-table entry: measure values plus dimension references."""

    measures: tuple[Measure, ...]
    dimension_refs: tuple[DimensionRef, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "measures", tuple(self.measures))
        object.__setattr__(self, "dimension_refs", tuple(self.dimension_refs))


@dataclass(frozen=True, slots=True)
class Warehouse:
    """A complete star-schema warehouse: dimensions plus fact cells."""

    dimensions: tuple[Dimension, ...] = ()
    cells: tuple[FactCell, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        object.__setattr__(self, "cells", tuple(self.cells))


@dataclass(frozen=True, slots=True)
class IndexCell:
    """One join-index entry: facts plus fully attributed dimension copies."""

    facts: tuple[Measure, ...]
    dimensions: tuple[IndexDimension, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "facts", tuple(self.facts))
        object.__setattr__(self, "dimensions", tuple(self.dimensions))


@dataclass(frozen=True, slots=True)
class JoinIndex:
    """The materialized join index: one cell per source fact cell."""

    cells: tuple[IndexCell, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(self.cells))


class Violation(NamedTuple):
    """One structural problem found by :func:`validate`.

    ``locator`` is a path-like position such as ``cell[3].dimension[customers]``.
    """

    locator: str
    message: str


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """All violations found in one warehouse; empty means valid."""

    violations: tuple[Violation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "violations", tuple(self.violations))

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(warehouse: Warehouse) -> ValidationReport:
    """Check a warehouse for structural and referential problems.

    Enforced rules:

    * dimension names are non-empty and unique;
    * node ids are non-empty and unique within their dimension;
    * attribute names are non-empty;
    * every cell has at least one measure and one reference;
    * measure ids are non-empty and values finite;
    * at most one reference per dimension within a cell;
    * every reference resolves to an existing dimension and node.

    Violations are returned as data; a valid warehouse yields an empty
    report.  The function is pure: repeated calls on the same value return
    identical reports.
    """
    violations: list[Violation] = []
    node_ids_by_dim: dict[str, set[str]] = {}

    seen_dim_names: set[str] = set()
    for k, dim in enumerate(warehouse.dimensions):
        dim_loc = f"dimension[{dim.name or k}]"
        if not dim.name:
            violations.append(Violation(dim_loc, "dimension name is empty"))
        elif dim.name in seen_dim_names:
            violations.append(
                Violation(dim_loc, f"duplicate dimension name '{dim.name}'")
            )
        else:
            seen_dim_names.add(dim.name)

        # Uniqueness is a per-dimension property; the resolution set keyed by
        # name additionally pools same-named dimensions so the later
        # duplicate-name violation is not compounded by spurious dangling refs.
        resolvable: set[str] = node_ids_by_dim.setdefault(dim.name, set())
        local_ids: set[str] = set()
        for j, node in enumerate(dim.nodes):
            node_loc = f"{dim_loc}.node[{node.id or j}]"
            if not node.id:
                violations.append(Violation(node_loc, "node id is empty"))
            elif node.id in local_ids:
                violations.append(
                    Violation(node_loc, f"duplicate node id '{node.id}'")
                )
            else:
                local_ids.add(node.id)
                resolvable.add(node.id)
            for i, attr in enumerate(node.attributes):
                if not attr.name:
                    violations.append(
                        Violation(
                            f"{node_loc}.attribute[{i}]", "attribute name is empty"
                        )
                    )

    for c, cell in enumerate(warehouse.cells):
        cell_loc = f"cell[{c}]"
        if not cell.measures:
            violations.append(Violation(cell_loc, "cell has no facts"))
        if not cell.dimension_refs:
            violations.append(Violation(cell_loc, "cell has no dimension references"))
        for i, measure in enumerate(cell.measures):
            fact_loc = f"{cell_loc}.fact[{measure.id or i}]"
            if not measure.id:
                violations.append(Violation(fact_loc, "fact id is empty"))
            if not measure.value.is_finite():
                violations.append(
                    Violation(fact_loc, f"fact value '{measure.value}' is not finite")
                )
        seen_ref_dims: set[str] = set()
        for ref in cell.dimension_refs:
            ref_loc = f"{cell_loc}.dimension[{ref.dimension_name}]"
            if ref.dimension_name in seen_ref_dims:
                violations.append(
                    Violation(
                        ref_loc,
                        f"duplicate reference to dimension '{ref.dimension_name}'",
                    )
                )
                continue
            seen_ref_dims.add(ref.dimension_name)
            known_ids = node_ids_by_dim.get(ref.dimension_name)
            if known_ids is None:
                violations.append(
                    Violation(
                        ref_loc,
                        f"references unknown dimension '{ref.dimension_name}'",
                    )
                )
            elif ref.node_id not in known_ids:
                violations.append(
                    Violation(ref_loc, f"references unknown node '{ref.node_id}'")
                )

    return ValidationReport(tuple(violations))


def attribute_names(dimension: Dimension) -> set[str]:
    """All attribute names that occur on at least one node of a dimension."""
    names: set[str] = set()
    for node in dimension.nodes:
        for attr in node.attributes:
            names.add(attr.name)
    return names


def measures_from(values: Iterable[tuple[str, int | str | Decimal]]) -> tuple[Measure, ...]:
    """Convenience constructor turning ``(id, value)`` pairs into measures."""
    return tuple(Measure(mid, Decimal(value)) for mid, value in values)
