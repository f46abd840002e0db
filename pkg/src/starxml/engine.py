"""Decisional-query evaluation over the warehouse and over the join index.

Queries are conjunctions of equality predicates on dimension attributes,
an optional multi-key group-by, and one aggregate over one measure.  Both
execution paths honor the same contract and return identical rows:

* :func:`execute_join_path` scans the fact cells and, for every dimension
  reference of every cell, resolves the referenced node by walking the
  dimension list and scanning its nodes, exactly as a join-free-of-indexes
  evaluator would.  Nothing is cached across cells, which is what makes
  the baseline expensive: each cell pays the dimension-traversal price
  again.
* :func:`execute_index_path` scans the index cells only.  Predicates and
  group keys are read from the attributes embedded in each cell, so the
  dimension documents are never touched and the join-comparison counter
  stays at zero by construction.

Shared semantics:

* several predicates on the same dimension must all hold on the single
  node the cell references (same-node conjunction);
* a cell lacking a reference for a predicated dimension does not match;
* a cell lacking a group-key dimension or attribute groups under the
  empty string;
* when a node carries duplicate attribute names, predicates match any
  occurrence and group keys take the first, in document order;
* the aggregate consumes every instance of the queried measure in a
  matching cell, and AVG divides the sum by the number of matching cells,
  so AVG times COUNT equals SUM;
* a matching cell without the queried measure is an error (strict mode).

Result rows are sorted by their group-key value tuple (code-point order,
which equals UTF-8 byte order).

Instrumentation: :class:`ExecutionStats` counts abstract node visits
under the traversal model of :mod:`starxml.costmodel`.  On the join path
each reference resolution charges the full dimension-list scan plus every
attribute of every node of the target dimension (the scan really happens
for node lookup and predicate evaluation; attribute reads that provably
cannot matter are charged without being performed).  On the index path
every dimension entry scanned charges one visit and every attribute of a
query-relevant entry charges one more.  ``join_comparisons`` counts one
cross-document match attempt per reference resolution (the membership
probe of a cell's node id against the dimension); the index path performs
none by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from typing import Iterable, NamedTuple

from .model import (
    Dimension,
    JoinIndex,
    Warehouse,
    attribute_names,
)


class QueryError(Exception):
    """A query references a dimension, attribute, or measure that is unusable."""


class Aggregate(str, Enum):
    SUM = "sum"
    AVG = "avg"
    COUNT = "count"
    MIN = "min"
    MAX = "max"


class Predicate(NamedTuple):
    """Equality condition on one dimension attribute."""

    dimension_name: str
    attribute_name: str
    value: str


class GroupKey(NamedTuple):
    """One group-by key, qualified by its owning dimension."""

    dimension_name: str
    attribute_name: str


@dataclass(frozen=True, slots=True)
class Query:
    """A declarative decisional query."""

    predicates: tuple[Predicate, ...]
    group_by: tuple[GroupKey, ...]
    aggregate: Aggregate
    measure_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "predicates", tuple(self.predicates))
        object.__setattr__(self, "group_by", tuple(self.group_by))
        if not self.measure_id:
            raise ValueError("measure id must be non-empty")
        for p in self.predicates:
            if not p.dimension_name or not p.attribute_name:
                raise ValueError(f"predicate has empty fields: {p}")
        for g in self.group_by:
            if not g.dimension_name or not g.attribute_name:
                raise ValueError(f"group key has empty fields: {g}")


@dataclass(frozen=True, slots=True)
class ResultRow:
    """One output row: group key triples, aggregate value, contributing cells."""

    key: tuple[tuple[str, str, str], ...]
    value: Decimal
    cell_count: int


@dataclass(slots=True)
class ExecutionStats:
    """Mutable counters filled by one query execution."""

    join_comparisons: int = 0
    node_visits: int = 0


def _predicates_by_dimension(query: Query) -> dict[str, tuple[tuple[str, str], ...]]:
    grouped: dict[str, list[tuple[str, str]]] = {}
    for p in query.predicates:
        grouped.setdefault(p.dimension_name, []).append((p.attribute_name, p.value))
    return {name: tuple(pairs) for name, pairs in grouped.items()}


def _group_slots_by_dimension(query: Query) -> dict[str, tuple[tuple[int, str], ...]]:
    grouped: dict[str, list[tuple[int, str]]] = {}
    for slot, g in enumerate(query.group_by):
        grouped.setdefault(g.dimension_name, []).append((slot, g.attribute_name))
    return {name: tuple(slots) for name, slots in grouped.items()}


def _fill_group_values(
    attrs: Iterable[tuple[str, str]],
    slots: tuple[tuple[int, str], ...],
    key: list[str],
) -> None:
    # First occurrence in document order wins.
    for slot, wanted in slots:
        for name, value in attrs:
            if name == wanted:
                key[slot] = value
                break


def _accumulate(
    groups: dict[tuple[str, ...], list],
    key: tuple[str, ...],
    values: list[Decimal],
) -> None:
    total = values[0]
    low = high = values[0]
    for v in values[1:]:
        total += v
        if v < low:
            low = v
        if v > high:
            high = v
    acc = groups.get(key)
    if acc is None:
        groups[key] = [1, total, low, high]
    else:
        acc[0] += 1
        acc[1] += total
        if low < acc[2]:
            acc[2] = low
        if high > acc[3]:
            acc[3] = high


def _finalize(groups: dict[tuple[str, ...], list], query: Query) -> list[ResultRow]:
    aggregate = query.aggregate
    group_by = query.group_by
    rows = []
    for key in sorted(groups):
        count, total, low, high = groups[key]
        if aggregate is Aggregate.SUM:
            value = total
        elif aggregate is Aggregate.AVG:
            value = total / Decimal(count)
        elif aggregate is Aggregate.COUNT:
            value = Decimal(count)
        elif aggregate is Aggregate.MIN:
            value = low
        else:
            value = high
        triples = tuple(
            (g.dimension_name, g.attribute_name, v) for g, v in zip(group_by, key)
        )
        rows.append(ResultRow(triples, value, count))
    return rows


def _measure_values(cell_measures, measure_id: str) -> list[Decimal]:
    values = [m.value for m in cell_measures if m.id == measure_id]
    if not values:
        raise QueryError(
            f"measure '{measure_id}' is not present in a matching cell"
        )
    return values


def _check_warehouse_names(warehouse: Warehouse, query: Query) -> None:
    by_name: dict[str, Dimension] = {d.name: d for d in warehouse.dimensions}
    referenced = [(p.dimension_name, p.attribute_name, "predicate") for p in query.predicates]
    referenced += [(g.dimension_name, g.attribute_name, "group-by") for g in query.group_by]
    known_attrs: dict[str, set[str]] = {}
    for dim_name, attr_name, where in referenced:
        dim = by_name.get(dim_name)
        if dim is None:
            raise QueryError(f"unknown dimension '{dim_name}' in {where}")
        names = known_attrs.get(dim_name)
        if names is None:
            names = known_attrs[dim_name] = attribute_names(dim)
        if attr_name not in names:
            raise QueryError(
                f"unknown attribute '{dim_name}.{attr_name}' in {where}"
            )


def execute_join_path(
    warehouse: Warehouse, query: Query, stats: ExecutionStats | None = None
) -> list[ResultRow]:
    """Evaluate a query against the raw warehouse with explicit joins.

    For every cell and every one of its dimension references the
    referenced node is looked up by scanning the dimension list and the
    dimension's nodes; predicates are evaluated on every node along the
    way (the candidate-id search) and group-key values are read off the
    node the reference joins to.  The warehouse must validate cleanly;
    unresolvable references are treated like absent dimensions.

    Raises :class:`QueryError` for a dimension or attribute name unknown
    to the warehouse, and for a matching cell that lacks the measure.
    """
    _check_warehouse_names(warehouse, query)
    dimensions = warehouse.dimensions
    dimension_count = len(dimensions)
    preds_by_dim = _predicates_by_dimension(query)
    slots_by_dim = _group_slots_by_dimension(query)
    predicated_count = len(preds_by_dim)
    group_width = len(query.group_by)
    measure_id = query.measure_id

    groups: dict[tuple[str, ...], list] = {}
    node_visits = 0
    comparisons = 0
    for cell in warehouse.cells:
        matches = True
        predicated_seen = 0
        key = [""] * group_width
        for ref_dim, ref_node in cell.dimension_refs:
            # Locate the dimension; the whole list is charged, matching the
            # breadth scan of the traversal model.
            node_visits += dimension_count
            target = None
            for dim in dimensions:
                if dim.name == ref_dim:
                    target = dim
            preds = preds_by_dim.get(ref_dim)
            if target is None:
                if preds is not None:
                    predicated_seen += 1
                    matches = False
                continue
            # One cross-document key-match attempt per reference resolution.
            comparisons += 1
            slots = slots_by_dim.get(ref_dim)
            if preds is not None:
                predicated_seen += 1
                required = (1 << len(preds)) - 1
                for node in target.nodes:
                    attrs = node.attributes
                    node_visits += len(attrs)
                    satisfied = 0
                    for name, value in attrs:
                        bit = 1
                        for wanted_name, wanted_value in preds:
                            if name == wanted_name and value == wanted_value:
                                satisfied |= bit
                            bit <<= 1
                    if node.id == ref_node:
                        if satisfied != required:
                            matches = False
                        if slots is not None:
                            _fill_group_values(attrs, slots, key)
            else:
                for node in target.nodes:
                    node_visits += len(node.attributes)
                    if node.id == ref_node and slots is not None:
                        _fill_group_values(node.attributes, slots, key)
        if not matches or predicated_seen < predicated_count:
            continue
        _accumulate(groups, tuple(key), _measure_values(cell.measures, measure_id))

    if stats is not None:
        stats.node_visits += node_visits
        stats.join_comparisons += comparisons
    return _finalize(groups, query)


def execute_index_path(
    index: JoinIndex, query: Query, stats: ExecutionStats | None = None
) -> list[ResultRow]:
    """Evaluate a query with a single scan over the join index.

    Every datum a predicate or group key needs is embedded in the cell, so
    no dimension lookup ever happens and ``stats.join_comparisons`` stays
    zero.  Name checking is intentionally data-driven: names that select
    nothing yield empty or sentinel-grouped results rather than errors, so
    results always agree with the join path on the source warehouse.
    """
    preds_by_dim = _predicates_by_dimension(query)
    slots_by_dim = _group_slots_by_dimension(query)
    predicated_count = len(preds_by_dim)
    group_width = len(query.group_by)
    measure_id = query.measure_id
    relevant = set(preds_by_dim) | set(slots_by_dim)

    groups: dict[tuple[str, ...], list] = {}
    node_visits = 0
    for cell in index.cells:
        matches = True
        predicated_seen = 0
        key = [""] * group_width
        for entry in cell.dimensions:
            node_visits += 1
            entry_dim = entry.dimension_name
            if entry_dim not in relevant:
                continue
            attrs = entry.attributes
            node_visits += len(attrs)
            preds = preds_by_dim.get(entry_dim)
            if preds is not None:
                predicated_seen += 1
                required = (1 << len(preds)) - 1
                satisfied = 0
                for name, value in attrs:
                    bit = 1
                    for wanted_name, wanted_value in preds:
                        if name == wanted_name and value == wanted_value:
                            satisfied |= bit
                        bit <<= 1
                if satisfied != required:
                    matches = False
            slots = slots_by_dim.get(entry_dim)
            if slots is not None:
                _fill_group_values(attrs, slots, key)
        if not matches or predicated_seen < predicated_count:
            continue
        _accumulate(groups, tuple(key), _measure_values(cell.facts, measure_id))

    if stats is not None:
        stats.node_visits += node_visits
    return _finalize(groups, query)


def parse_aggregate_spec(text: str) -> tuple[Aggregate, str]:
    """Parse ``<agg>:<measureId>``, e.g. ``sum:quantity``."""
    agg_name, sep, measure_id = text.partition(":")
    if not sep or not measure_id:
        raise ValueError(f"expected <agg>:<measureId>, got '{text}'")
    try:
        aggregate = Aggregate(agg_name)
    except ValueError:
        choices = ", ".join(a.value for a in Aggregate)
        raise ValueError(f"unknown aggregate '{agg_name}' (choose from {choices})") from None
    return aggregate, measure_id


def parse_predicate_flag(text: str) -> Predicate:
    """Parse ``<dim>.<attr>=<value>``, e.g. ``customers.cust_city=Lyon``."""
    path, sep, value = text.partition("=")
    if not sep:
        raise ValueError(f"expected <dim>.<attr>=<value>, got '{text}'")
    dim, sep, attr = path.partition(".")
    if not sep or not dim or not attr:
        raise ValueError(f"expected <dim>.<attr>=<value>, got '{text}'")
    return Predicate(dim, attr, value)


def parse_group_by_flag(text: str) -> tuple[GroupKey, ...]:
    """Parse a comma-separated ``<dim>.<attr>`` list."""
    keys = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        dim, sep, attr = part.partition(".")
        if not sep or not dim or not attr:
            raise ValueError(f"expected <dim>.<attr>, got '{part}'")
        keys.append(GroupKey(dim, attr))
    return tuple(keys)


def build_query(
    aggregate_spec: str,
    where: Iterable[str] = (),
    group_by: str = "",
) -> Query:
    """Assemble a :class:`Query` from the textual flag grammar."""
    aggregate, measure_id = parse_aggregate_spec(aggregate_spec)
    predicates = tuple(parse_predicate_flag(w) for w in where)
    keys = parse_group_by_flag(group_by) if group_by else ()
    return Query(predicates, keys, aggregate, measure_id)
