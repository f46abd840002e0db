"""Join-index materialization tests."""

from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import given, settings

from starxml.datagen import GenSpec, generate
from starxml.indexer import InvalidWarehouseError, build_index, index_stats
from starxml.model import (
    AttributeKV,
    Dimension,
    DimensionNode,
    DimensionRef,
    FactCell,
    IndexCell,
    IndexDimension,
    JoinIndex,
    Measure,
    Warehouse,
)
from wh_strategies import valid_warehouses


def test_empty_warehouse_builds_empty_index():
    assert build_index(Warehouse((), ())) == JoinIndex(())


def test_build_index_migrates_attributes():
    customers = Dimension(
        "customers", (DimensionNode("c1", (AttributeKV("cust_city", "Lyon"),)),)
    )
    cell = FactCell((Measure("quantity", Decimal(3)),), (DimensionRef("customers", "c1"),))
    index = build_index(Warehouse((customers,), (cell,)))

    expected = JoinIndex(
        (
            IndexCell(
                (Measure("quantity", Decimal(3)),),
                (IndexDimension("customers", "c1", (AttributeKV("cust_city", "Lyon"),)),),
            ),
        )
    )
    assert index == expected
    # The copies are value-equal but independent objects.
    assert index.cells[0].dimensions[0].attributes is not customers.nodes[0].attributes


def test_build_index_rejects_invalid_warehouse():
    customers = Dimension("customers", (DimensionNode("c1"),))
    cell = FactCell((Measure("quantity", Decimal(3)),), (DimensionRef("customers", "c9"),))
    with pytest.raises(InvalidWarehouseError) as excinfo:
        build_index(Warehouse((customers,), (cell,)))
    assert len(excinfo.value.report.violations) == 1


def test_index_stats_empty():
    stats = index_stats(JoinIndex(()))
    assert (stats.cell_count, stats.entries_per_cell, stats.attributes_per_entry) == (0, {}, {})


def test_index_stats_one_cell():
    index = JoinIndex(
        (
            IndexCell(
                (Measure("q", Decimal(1)),),
                (IndexDimension("d", "n", (AttributeKV("a", "v"),)),),
            ),
        )
    )
    stats = index_stats(index)
    assert stats.cell_count == 1
    assert stats.entries_per_cell == {1: 1}
    assert stats.attributes_per_entry == {1: 1}


def test_index_stats_against_generator_ground_truth():
    warehouse = generate(GenSpec(5, 50, 10, 100, seed=7))
    stats = index_stats(build_index(warehouse))
    assert stats.cell_count == 100
    assert stats.entries_per_cell == {5: 100}
    assert stats.attributes_per_entry == {10: 500}


@settings(max_examples=60)
@given(valid_warehouses())
def test_lossless_join_and_count_preservation(data):
    warehouse, _ = data
    index = build_index(warehouse)

    assert len(index.cells) == len(warehouse.cells)
    for cell, icell in zip(warehouse.cells, index.cells):
        assert icell.facts == cell.measures
        assert len(icell.dimensions) == len(cell.dimension_refs)
        for ref, entry in zip(cell.dimension_refs, icell.dimensions):
            assert (entry.dimension_name, entry.node_id) == ref
            # Brute-force join: find the node by exhaustive scan and compare
            # the full attribute sequence (same values, same order).
            joined = [
                node.attributes
                for dim in warehouse.dimensions
                if dim.name == ref.dimension_name
                for node in dim.nodes
                if node.id == ref.node_id
            ]
            assert len(joined) == 1
            assert entry.attributes == joined[0]


@settings(max_examples=20)
@given(valid_warehouses())
def test_build_index_is_deterministic(data):
    warehouse, _ = data
    assert build_index(warehouse) == build_index(warehouse)
