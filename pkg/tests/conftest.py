"""Shared fixtures: small hand-built warehouses used across test modules."""

from __future__ import annotations

from decimal import Decimal

import pytest

from starxml.model import (
    AttributeKV,
    Dimension,
    DimensionNode,
    DimensionRef,
    FactCell,
    Measure,
    Warehouse,
)


@pytest.fixture
def two_city_warehouse() -> Warehouse:
    """Two cells referencing one customer each, in Lyon and Paris."""
    customers = Dimension(
        "customers",
        (
            DimensionNode("c1", (AttributeKV("cust_city", "Lyon"),)),
            DimensionNode("c2", (AttributeKV("cust_city", "Paris"),)),
        ),
    )
    cells = (
        FactCell((Measure("quantity", Decimal(3)),), (DimensionRef("customers", "c1"),)),
        FactCell((Measure("quantity", Decimal(5)),), (DimensionRef("customers", "c2"),)),
    )
    return Warehouse((customers,), cells)


@pytest.fixture
def grouped_sales_warehouse() -> Warehouse:
    """Two Lyon customers sharing a postal code but differing in first name."""
    customers = Dimension(
        "customers",
        (
            DimensionNode(
                "c1",
                (
                    AttributeKV("cust_city", "Lyon"),
                    AttributeKV("cust_first_name", "Anne"),
                    AttributeKV("cust_postal_code", "69001"),
                ),
            ),
            DimensionNode(
                "c2",
                (
                    AttributeKV("cust_city", "Lyon"),
                    AttributeKV("cust_first_name", "Luc"),
                    AttributeKV("cust_postal_code", "69001"),
                ),
            ),
            DimensionNode(
                "c3",
                (
                    AttributeKV("cust_city", "Paris"),
                    AttributeKV("cust_first_name", "Zoe"),
                    AttributeKV("cust_postal_code", "75001"),
                ),
            ),
        ),
    )
    products = Dimension(
        "products",
        (
            DimensionNode("p1", (AttributeKV("prod_name", "bolt"),)),
            DimensionNode("p2", (AttributeKV("prod_name", "nut"),)),
        ),
    )
    cells = (
        FactCell(
            (Measure("quantity", Decimal(3)),),
            (DimensionRef("customers", "c1"), DimensionRef("products", "p1")),
        ),
        FactCell(
            (Measure("quantity", Decimal(5)),),
            (DimensionRef("customers", "c2"), DimensionRef("products", "p2")),
        ),
        FactCell(
            (Measure("quantity", Decimal(7)),),
            (DimensionRef("customers", "c1"), DimensionRef("products", "p2")),
        ),
        FactCell(
            (Measure("quantity", Decimal(11)),),
            (DimensionRef("customers", "c3"), DimensionRef("products", "p1")),
        ),
    )
    return Warehouse((customers, products), cells)
