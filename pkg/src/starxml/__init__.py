"""Join-index toolkit for star-schema warehouses stored as XML documents.

The package loads dimension and fact documents into an in-memory star
schema, materializes a denormalized join index, evaluates decisional
queries with or without the index, and models the traversal costs of both
execution paths.
"""

from .costmodel import (
    CostEstimate,
    CostParams,
    cost_sweep,
    cost_with_index,
    cost_without_index,
    estimate,
    gain_ratio,
    params_from_warehouse,
)
from .datagen import GenSpec, generate
from .engine import (
    Aggregate,
    ExecutionStats,
    GroupKey,
    Predicate,
    Query,
    QueryError,
    ResultRow,
    build_query,
    execute_index_path,
    execute_join_path,
)
from .indexer import IndexStats, InvalidWarehouseError, build_index, index_stats
from .model import (
    AttributeKV,
    Dimension,
    DimensionNode,
    DimensionRef,
    FactCell,
    IndexCell,
    IndexDimension,
    JoinIndex,
    Measure,
    ValidationReport,
    Violation,
    Warehouse,
    validate,
)
from .xmlio import (
    ParseDiagnostic,
    ParseError,
    load_warehouse,
    parse_dimensions,
    parse_facts,
    parse_index,
    serialize_dimensions,
    serialize_facts,
    serialize_index,
    write_warehouse,
)

__version__ = "0.1.0"

__all__ = [
    "Aggregate",
    "AttributeKV",
    "CostEstimate",
    "CostParams",
    "Dimension",
    "DimensionNode",
    "DimensionRef",
    "ExecutionStats",
    "FactCell",
    "GenSpec",
    "GroupKey",
    "IndexCell",
    "IndexDimension",
    "IndexStats",
    "InvalidWarehouseError",
    "JoinIndex",
    "Measure",
    "ParseDiagnostic",
    "ParseError",
    "Predicate",
    "Query",
    "QueryError",
    "ResultRow",
    "ValidationReport",
    "Violation",
    "Warehouse",
    "build_index",
    "build_query",
    "cost_sweep",
    "cost_with_index",
    "cost_without_index",
    "estimate",
    "execute_index_path",
    "execute_join_path",
    "gain_ratio",
    "generate",
    "index_stats",
    "load_warehouse",
    "params_from_warehouse",
    "parse_dimensions",
    "parse_facts",
    "parse_index",
    "serialize_dimensions",
    "serialize_facts",
    "serialize_index",
    "validate",
    "write_warehouse",
]
