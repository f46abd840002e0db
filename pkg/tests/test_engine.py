"""Query-engine tests: fixtures, error policy, and oracle equivalence."""

from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import given, settings

from starxml.engine import (
    Aggregate,
    ExecutionStats,
    GroupKey,
    Predicate,
    Query,
    QueryError,
    build_query,
    execute_index_path,
    execute_join_path,
    parse_aggregate_spec,
    parse_group_by_flag,
    parse_predicate_flag,
)
from starxml.indexer import build_index
from starxml.model import (
    Dimension,
    DimensionNode,
    DimensionRef,
    FactCell,
    JoinIndex,
    Measure,
    Warehouse,
)
import oracle
from wh_strategies import warehouse_and_query

LYON_SUM = Query(
    (Predicate("customers", "cust_city", "Lyon"),), (), Aggregate.SUM, "quantity"
)


def _both_paths(warehouse, query):
    join_rows = execute_join_path(warehouse, query)
    index_rows = execute_index_path(build_index(warehouse), query)
    assert join_rows == index_rows
    return join_rows


def test_lyon_sum_without_grouping(two_city_warehouse):
    rows = _both_paths(two_city_warehouse, LYON_SUM)
    assert len(rows) == 1
    assert rows[0].key == ()
    assert rows[0].value == Decimal(3)
    assert rows[0].cell_count == 1


def test_sum_over_all_cells(two_city_warehouse):
    query = Query((), (), Aggregate.SUM, "quantity")
    rows = _both_paths(two_city_warehouse, query)
    assert rows[0].value == Decimal(8)
    assert rows[0].cell_count == 2


def test_avg_over_all_cells(two_city_warehouse):
    query = Query((), (), Aggregate.AVG, "quantity")
    rows = _both_paths(two_city_warehouse, query)
    assert rows[0].value == Decimal(4)


def test_count_without_predicates_equals_cell_count(grouped_sales_warehouse):
    query = Query((), (), Aggregate.COUNT, "quantity")
    rows = _both_paths(grouped_sales_warehouse, query)
    assert rows[0].value == Decimal(len(grouped_sales_warehouse.cells))


def test_grouped_lyon_query_orders_rows_by_key(grouped_sales_warehouse):
    query = Query(
        (Predicate("customers", "cust_city", "Lyon"),),
        (
            GroupKey("customers", "cust_first_name"),
            GroupKey("customers", "cust_postal_code"),
        ),
        Aggregate.SUM,
        "quantity",
    )
    rows = _both_paths(grouped_sales_warehouse, query)
    # Two Lyon customers share the postal code and differ by first name:
    # Anne bought 3 + 7, Luc bought 5.  Keys sort ascending.
    assert [
        (tuple(v for _, _, v in row.key), row.value, row.cell_count) for row in rows
    ] == [
        (("Anne", "69001"), Decimal(10), 2),
        (("Luc", "69001"), Decimal(5), 1),
    ]
    assert rows[0].key[0] == ("customers", "cust_first_name", "Anne")


def test_missing_group_dimension_groups_under_empty_string(grouped_sales_warehouse):
    # Drop the products ref from one Lyon cell; its prod_name groups as "".
    cells = list(grouped_sales_warehouse.cells)
    cells[0] = FactCell(cells[0].measures, cells[0].dimension_refs[:1])
    warehouse = Warehouse(grouped_sales_warehouse.dimensions, tuple(cells))
    query = Query(
        (Predicate("customers", "cust_city", "Lyon"),),
        (GroupKey("products", "prod_name"),),
        Aggregate.SUM,
        "quantity",
    )
    rows = _both_paths(warehouse, query)
    assert [(row.key[0][2], row.value) for row in rows] == [
        ("", Decimal(3)),
        ("nut", Decimal(12)),
    ]


def test_predicate_on_missing_dimension_excludes_cell(grouped_sales_warehouse):
    cells = list(grouped_sales_warehouse.cells)
    cells[0] = FactCell(cells[0].measures, cells[0].dimension_refs[:1])  # no products
    warehouse = Warehouse(grouped_sales_warehouse.dimensions, tuple(cells))
    query = Query(
        (Predicate("products", "prod_name", "bolt"),), (), Aggregate.SUM, "quantity"
    )
    rows = _both_paths(warehouse, query)
    assert rows[0].value == Decimal(11)  # only the Paris bolt cell remains


def test_predicates_on_same_dimension_apply_to_one_node(grouped_sales_warehouse):
    query = Query(
        (
            Predicate("customers", "cust_city", "Lyon"),
            Predicate("customers", "cust_first_name", "Anne"),
        ),
        (),
        Aggregate.SUM,
        "quantity",
    )
    rows = _both_paths(grouped_sales_warehouse, query)
    assert rows[0].value == Decimal(10)


def test_min_max_aggregates(grouped_sales_warehouse):
    low = _both_paths(grouped_sales_warehouse, Query((), (), Aggregate.MIN, "quantity"))
    high = _both_paths(grouped_sales_warehouse, Query((), (), Aggregate.MAX, "quantity"))
    assert low[0].value == Decimal(3)
    assert high[0].value == Decimal(11)


def test_empty_index_any_query_yields_no_rows():
    rows = execute_index_path(JoinIndex(()), LYON_SUM)
    assert rows == []


def test_no_matching_cells_yields_no_rows(two_city_warehouse):
    query = Query(
        (Predicate("customers", "cust_city", "Oslo"),), (), Aggregate.SUM, "quantity"
    )
    assert _both_paths(two_city_warehouse, query) == []


def test_unknown_dimension_raises(two_city_warehouse):
    query = Query((Predicate("nope", "cust_city", "Lyon"),), (), Aggregate.SUM, "quantity")
    with pytest.raises(QueryError, match="unknown dimension 'nope'"):
        execute_join_path(two_city_warehouse, query)


def test_unknown_attribute_raises(two_city_warehouse):
    query = Query((), (GroupKey("customers", "shoe_size"),), Aggregate.SUM, "quantity")
    with pytest.raises(QueryError, match="unknown attribute 'customers.shoe_size'"):
        execute_join_path(two_city_warehouse, query)


def test_missing_measure_in_matched_cell_raises(two_city_warehouse):
    query = Query((), (), Aggregate.COUNT, "revenue")
    with pytest.raises(QueryError, match="measure 'revenue'"):
        execute_join_path(two_city_warehouse, query)
    with pytest.raises(QueryError, match="measure 'revenue'"):
        execute_index_path(build_index(two_city_warehouse), query)


def test_join_comparisons_counted_per_reference(two_city_warehouse):
    stats = ExecutionStats()
    execute_join_path(two_city_warehouse, LYON_SUM, stats)
    # Two cells, one reference each, probed against the qualifying ids.
    assert stats.join_comparisons == 2


def test_join_comparisons_zero_on_empty_warehouse():
    stats = ExecutionStats()
    execute_join_path(Warehouse((), ()), Query((), (), Aggregate.SUM, "q"), stats)
    assert stats.join_comparisons == 0


def test_index_path_performs_no_join_comparisons(two_city_warehouse):
    stats = ExecutionStats()
    execute_index_path(build_index(two_city_warehouse), LYON_SUM, stats)
    assert stats.join_comparisons == 0
    assert stats.node_visits > 0


def test_node_visits_match_traversal_model(two_city_warehouse):
    join_stats = ExecutionStats()
    execute_join_path(two_city_warehouse, LYON_SUM, join_stats)
    # 2 cells x 1 ref x (1 dimension + 2 nodes x 1 attribute) = 6.
    assert join_stats.node_visits == 6
    index_stats = ExecutionStats()
    execute_index_path(build_index(two_city_warehouse), LYON_SUM, index_stats)
    # 2 cells x (1 entry + 1 embedded attribute) = 4.
    assert index_stats.node_visits == 4


@settings(max_examples=120, deadline=None)
@given(warehouse_and_query())
def test_paths_agree_with_oracle(data):
    warehouse, query = data
    expected = oracle.evaluate(warehouse, query)
    join_rows = oracle.rows_as_triples(execute_join_path(warehouse, query))
    index_rows = oracle.rows_as_triples(execute_index_path(build_index(warehouse), query))
    assert join_rows == expected
    assert index_rows == expected


@settings(max_examples=60, deadline=None)
@given(warehouse_and_query())
def test_aggregate_identities(data):
    warehouse, query = data
    total = execute_join_path(
        warehouse, Query(query.predicates, (), Aggregate.SUM, query.measure_id)
    )
    grouped_sum = execute_join_path(
        warehouse, Query(query.predicates, query.group_by, Aggregate.SUM, query.measure_id)
    )
    counts = execute_join_path(
        warehouse, Query(query.predicates, query.group_by, Aggregate.COUNT, query.measure_id)
    )
    averages = execute_join_path(
        warehouse, Query(query.predicates, query.group_by, Aggregate.AVG, query.measure_id)
    )

    if not total:
        assert grouped_sum == []
        return
    # SUM over the partition equals the SUM of the per-group SUMs.
    assert sum((r.value for r in grouped_sum), Decimal(0)) == total[0].value
    # COUNT equals the number of contributing cells per group.
    assert all(r.value == Decimal(r.cell_count) for r in counts)
    # AVG * COUNT == SUM, group by group.
    for avg_row, sum_row in zip(averages, grouped_sum):
        assert avg_row.key == sum_row.key
        assert abs(avg_row.value * avg_row.cell_count - sum_row.value) <= Decimal("1e-9")


@settings(max_examples=60, deadline=None)
@given(warehouse_and_query())
def test_adding_a_predicate_never_widens_the_match(data):
    warehouse, query = data
    if not query.predicates:
        return
    narrowed = query
    widened = Query(query.predicates[:-1], query.group_by, query.aggregate, query.measure_id)
    narrow_cells = sum(r.cell_count for r in execute_join_path(warehouse, narrowed))
    wide_cells = sum(r.cell_count for r in execute_join_path(warehouse, widened))
    assert narrow_cells <= wide_cells


def test_flag_grammar():
    assert parse_aggregate_spec("sum:quantity") == (Aggregate.SUM, "quantity")
    assert parse_predicate_flag("customers.cust_city=Lyon") == Predicate(
        "customers", "cust_city", "Lyon"
    )
    assert parse_predicate_flag("d.a=x=y") == Predicate("d", "a", "x=y")
    assert parse_group_by_flag("customers.cust_first_name,customers.cust_postal_code") == (
        GroupKey("customers", "cust_first_name"),
        GroupKey("customers", "cust_postal_code"),
    )
    assert parse_group_by_flag("") == ()

    query = build_query(
        "avg:quantity",
        ["customers.cust_city=Lyon", "products.prod_name=bolt"],
        "customers.cust_postal_code",
    )
    assert query.aggregate is Aggregate.AVG
    assert len(query.predicates) == 2
    assert query.group_by == (GroupKey("customers", "cust_postal_code"),)


@pytest.mark.parametrize(
    "bad",
    ["sum", "sum:", "mode:quantity", ":quantity"],
)
def test_bad_aggregate_specs_raise(bad):
    with pytest.raises(ValueError):
        parse_aggregate_spec(bad)


@pytest.mark.parametrize("bad", ["customers", "customers=Lyon", ".a=v", "d.=v"])
def test_bad_predicate_flags_raise(bad):
    with pytest.raises(ValueError):
        parse_predicate_flag(bad)


def test_query_rejects_empty_fields():
    with pytest.raises(ValueError):
        Query((), (), Aggregate.SUM, "")
    with pytest.raises(ValueError):
        Query((Predicate("", "a", "v"),), (), Aggregate.SUM, "m")
