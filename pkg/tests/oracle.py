"""Independent brute-force query evaluator used as the test oracle.

Deliberately written with plain nested loops over the in-memory model and
no code shared with the engine under test.  Semantics mirror the query
contract: same-node conjunction per dimension, missing dimensions fail
predicates and group under the empty string, predicates match any
duplicate attribute occurrence while group keys take the first, AVG is
the sum divided by the number of contributing cells.
"""

from __future__ import annotations

from decimal import Decimal


def evaluate(warehouse, query):
    """Return sorted (key_values, value, cell_count) triples."""
    grouped: dict[tuple[str, ...], list[object]] = {}

    for cell in warehouse.cells:
        # Materialize the join: dimension name -> attribute list of the
        # node this cell references.
        joined: dict[str, tuple] = {}
        for ref in cell.dimension_refs:
            for dim in warehouse.dimensions:
                if dim.name == ref.dimension_name:
                    for node in dim.nodes:
                        if node.id == ref.node_id:
                            joined[dim.name] = node.attributes
                            break
                    break

        ok = True
        for pred in query.predicates:
            attrs = joined.get(pred.dimension_name, ())
            if not any(
                a.name == pred.attribute_name and a.value == pred.value for a in attrs
            ):
                ok = False
                break
        if not ok:
            continue

        key_parts = []
        for gk in query.group_by:
            found = ""
            for a in joined.get(gk.dimension_name, ()):
                if a.name == gk.attribute_name:
                    found = a.value
                    break
            key_parts.append(found)
        key = tuple(key_parts)

        values = [m.value for m in cell.measures if m.id == query.measure_id]
        if not values:
            raise LookupError(f"measure {query.measure_id!r} missing from a matched cell")
        bucket = grouped.setdefault(key, [0, []])
        bucket[0] += 1
        bucket[1].extend(values)

    agg = query.aggregate.value
    rows = []
    for key in sorted(grouped):
        cell_count, values = grouped[key]
        if agg == "sum":
            result = sum(values, Decimal(0))
        elif agg == "avg":
            result = sum(values, Decimal(0)) / Decimal(cell_count)
        elif agg == "count":
            result = Decimal(cell_count)
        elif agg == "min":
            result = min(values)
        elif agg == "max":
            result = max(values)
        else:
            raise AssertionError(f"unknown aggregate {agg!r}")
        rows.append((key, result, cell_count))
    return rows


def rows_as_triples(result_rows):
    """Flatten engine ResultRows into the oracle's comparison shape."""
    return [
        (tuple(v for _, _, v in row.key), row.value, row.cell_count)
        for row in result_rows
    ]
