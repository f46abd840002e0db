"""Streaming parsers and canonical serializers for the warehouse documents.

Three document shapes are supported (whitespace between elements is
insignificant on input; output uses the canonical two-space indentation):

``Dimensions.xml``::

    <dimensionData>
      <classification>
        <Level node="customers">
          <node id="c1">
            <attribute name="cust_city" value="Lyon"/>
          </node>
        </Level>
      </classification>
    </dimensionData>

``TableFacts.xml``::

    <CubeFacts>
      <cube>
        <Cell>
          <Fact id="quantity" value="3"/>
          <dimension id="customers" node="c1"/>
        </Cell>
      </cube>
    </CubeFacts>

``Index.xml`` reuses the facts layout, with ``attribute`` children nested
under each ``dimension`` element.

Parsers are incremental: memory use is bounded by one cell or one
dimension at a time plus whatever the caller retains, so arbitrarily large
documents can be scanned with the ``iter_*`` functions.  Serializers are
deterministic: equal values produce byte-identical UTF-8 documents.

Malformed input and missing required attributes raise :class:`ParseError`
carrying a fatal :class:`ParseDiagnostic`.  Unknown elements and
attributes are skipped with a warning appended to the optional
``diagnostics`` list.
"""

from __future__ import annotations

import io
import os
import xml.etree.ElementTree as ET
from contextlib import contextmanager
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, NamedTuple
from xml.sax.saxutils import quoteattr

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
    Warehouse,
)

DIMENSIONS_FILE = "Dimensions.xml"
FACTS_FILE = "TableFacts.xml"
INDEX_FILE = "Index.xml"
SCHEMA_FILE = "Schema.xml"

_XML_DECLARATION = '<?xml version="1.0" encoding="UTF-8"?>\n'


class ParseDiagnostic(NamedTuple):
    """One parser finding; ``severity`` is ``"warning"`` or ``"fatal"``."""

    severity: str
    message: str
    location: str


class ParseError(Exception):
    """Fatal parse failure; no value is produced."""

    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(f"{diagnostic.message} ({diagnostic.location})")
        self.diagnostic = diagnostic


def _fatal(message: str, location: str) -> ParseError:
    return ParseError(ParseDiagnostic("fatal", message, location))


def _warn(diagnostics: list[ParseDiagnostic] | None, message: str, location: str) -> None:
    if diagnostics is not None:
        diagnostics.append(ParseDiagnostic("warning", message, location))


@contextmanager
def _as_stream(source: bytes | str | os.PathLike | BinaryIO) -> Iterator[BinaryIO]:
    """Accept raw bytes, a filesystem path, or a binary file-like object."""
    if isinstance(source, bytes):
        yield io.BytesIO(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as handle:
            yield handle
    else:
        yield source


class _Walker:
    """Depth-tracking wrapper over iterparse with unknown-subtree skipping."""

    def __init__(self, stream: BinaryIO, diagnostics: list[ParseDiagnostic] | None):
        self._events = ET.iterparse(stream, events=("start", "end"))
        self.diagnostics = diagnostics
        self.depth = 0
        self._skip_from: int | None = None

    def __iter__(self) -> Iterator[tuple[str, ET.Element]]:
        try:
            for event, elem in self._events:
                if event == "start":
                    self.depth += 1
                    if self._skip_from is not None:
                        continue
                    yield event, elem
                else:
                    if self._skip_from is not None:
                        if self.depth == self._skip_from:
                            self._skip_from = None
                        self.depth -= 1
                        continue
                    yield event, elem
                    self.depth -= 1
        except ET.ParseError as exc:
            line, column = exc.position
            raise _fatal(
                f"malformed XML: {exc}", f"line {line}, column {column}"
            ) from exc

    def skip_subtree(self, tag: str, location: str) -> None:
        _warn(self.diagnostics, f"ignoring unexpected element '{tag}'", location)
        self._skip_from = self.depth

    def require(self, elem: ET.Element, attr: str, location: str) -> str:
        value = elem.get(attr)
        if value is None:
            raise _fatal(f"missing required attribute '{attr}'", location)
        return value

    def check_attrs(self, elem: ET.Element, allowed: frozenset[str], location: str) -> None:
        for name in elem.attrib:
            if name not in allowed:
                _warn(self.diagnostics, f"ignoring unknown attribute '{name}'", location)


_LEVEL_ATTRS = frozenset({"node"})
_NODE_ATTRS = frozenset({"id"})
_ATTRIBUTE_ATTRS = frozenset({"name", "value"})
_FACT_ATTRS = frozenset({"id", "value"})
_DIMENSION_ATTRS = frozenset({"id", "node"})


def iter_dimensions(
    source: bytes | str | os.PathLike | BinaryIO,
    diagnostics: list[ParseDiagnostic] | None = None,
) -> Iterator[Dimension]:
    """Yield one :class:`Dimension` per ``Level`` element, in document order."""
    with _as_stream(source) as stream:
        walker = _Walker(stream, diagnostics)
        classification: ET.Element | None = None
        level_name = ""
        level_index = 0
        node_id = ""
        node_index = 0
        nodes: list[DimensionNode] = []
        attrs: list[AttributeKV] = []
        location = ""
        for event, elem in walker:
            depth = walker.depth
            tag = elem.tag
            if event == "start":
                if depth == 1:
                    if tag != "dimensionData":
                        raise _fatal(
                            f"unexpected root element '{tag}', expected 'dimensionData'",
                            tag,
                        )
                elif depth == 2:
                    if tag != "classification":
                        walker.skip_subtree(tag, f"dimensionData/{tag}")
                    else:
                        classification = elem
                elif depth == 3:
                    if tag != "Level":
                        walker.skip_subtree(tag, f"classification/{tag}")
                        continue
                    level_index += 1
                    location = f"Level[{level_index}]"
                    level_name = walker.require(elem, "node", location)
                    walker.check_attrs(elem, _LEVEL_ATTRS, location)
                    nodes = []
                    node_index = 0
                elif depth == 4:
                    if tag != "node":
                        walker.skip_subtree(tag, f"Level[{level_index}]/{tag}")
                        continue
                    node_index += 1
                    location = f"Level[{level_index}]/node[{node_index}]"
                    node_id = walker.require(elem, "id", location)
                    walker.check_attrs(elem, _NODE_ATTRS, location)
                    attrs = []
                elif depth == 5:
                    if tag != "attribute":
                        walker.skip_subtree(tag, f"{location}/{tag}")
                        continue
                    attr_location = f"{location}/attribute[{len(attrs) + 1}]"
                    attrs.append(
                        AttributeKV(
                            walker.require(elem, "name", attr_location),
                            walker.require(elem, "value", attr_location),
                        )
                    )
                    walker.check_attrs(elem, _ATTRIBUTE_ATTRS, attr_location)
                else:
                    walker.skip_subtree(tag, f"{location}/{tag}")
            else:
                if depth == 4 and tag == "node":
                    nodes.append(DimensionNode(node_id, tuple(attrs)))
                elif depth == 3 and tag == "Level":
                    yield Dimension(level_name, tuple(nodes))
                    elem.clear()
                    if classification is not None and len(classification):
                        del classification[:]


def parse_dimensions(
    source: bytes | str | os.PathLike | BinaryIO,
    diagnostics: list[ParseDiagnostic] | None = None,
) -> list[Dimension]:
    """Parse a ``Dimensions.xml`` document into its dimension list."""
    return list(iter_dimensions(source, diagnostics))


def _parse_decimal(raw: str, location: str) -> Decimal:
    try:
        value = Decimal(raw)
    except InvalidOperation:
        raise _fatal(f"fact value '{raw}' is not numeric", location) from None
    if not value.is_finite():
        raise _fatal(f"fact value '{raw}' is not finite", location)
    return value


def _iter_cells(
    source: bytes | str | os.PathLike | BinaryIO,
    diagnostics: list[ParseDiagnostic] | None,
    with_attributes: bool,
) -> Iterator[tuple[tuple[Measure, ...], list[tuple[str, str, tuple[AttributeKV, ...]]]]]:
    """Shared scanner for the facts and index documents.

    Yields ``(measures, entries)`` per ``Cell``; each entry is
    ``(dimension name, node id, attributes)`` with attributes always empty
    when ``with_attributes`` is false.
    """
    with _as_stream(source) as stream:
        walker = _Walker(stream, diagnostics)
        cube: ET.Element | None = None
        cell_index = 0
        location = ""
        measures: list[Measure] = []
        entries: list[tuple[str, str, tuple[AttributeKV, ...]]] = []
        dim_name = ""
        dim_node = ""
        dim_attrs: list[AttributeKV] = []
        dim_location = ""
        for event, elem in walker:
            depth = walker.depth
            tag = elem.tag
            if event == "start":
                if depth == 1:
                    if tag != "CubeFacts":
                        raise _fatal(
                            f"unexpected root element '{tag}', expected 'CubeFacts'",
                            tag,
                        )
                elif depth == 2:
                    if tag != "cube":
                        walker.skip_subtree(tag, f"CubeFacts/{tag}")
                    else:
                        cube = elem
                elif depth == 3:
                    if tag != "Cell":
                        walker.skip_subtree(tag, f"cube/{tag}")
                        continue
                    cell_index += 1
                    location = f"Cell[{cell_index}]"
                    measures = []
                    entries = []
                elif depth == 4:
                    if tag == "Fact":
                        fact_location = f"{location}/Fact[{len(measures) + 1}]"
                        fact_id = walker.require(elem, "id", fact_location)
                        raw = walker.require(elem, "value", fact_location)
                        walker.check_attrs(elem, _FACT_ATTRS, fact_location)
                        measures.append(Measure(fact_id, _parse_decimal(raw, fact_location)))
                    elif tag == "dimension":
                        dim_location = f"{location}/dimension[{len(entries) + 1}]"
                        dim_name = walker.require(elem, "id", dim_location)
                        dim_node = walker.require(elem, "node", dim_location)
                        walker.check_attrs(elem, _DIMENSION_ATTRS, dim_location)
                        dim_attrs = []
                    else:
                        walker.skip_subtree(tag, f"{location}/{tag}")
                elif depth == 5:
                    if with_attributes and tag == "attribute":
                        attr_location = f"{dim_location}/attribute[{len(dim_attrs) + 1}]"
                        dim_attrs.append(
                            AttributeKV(
                                walker.require(elem, "name", attr_location),
                                walker.require(elem, "value", attr_location),
                            )
                        )
                        walker.check_attrs(elem, _ATTRIBUTE_ATTRS, attr_location)
                    else:
                        walker.skip_subtree(tag, f"{dim_location}/{tag}")
                else:
                    walker.skip_subtree(tag, f"{location}/{tag}")
            else:
                if depth == 4 and tag == "dimension":
                    entries.append((dim_name, dim_node, tuple(dim_attrs)))
                elif depth == 3 and tag == "Cell":
                    if not measures:
                        raise _fatal("Cell has no Fact children", location)
                    yield tuple(measures), entries
                    elem.clear()
                    if cube is not None and len(cube):
                        del cube[:]


def iter_facts(
    source: bytes | str | os.PathLike | BinaryIO,
    diagnostics: list[ParseDiagnostic] | None = None,
) -> Iterator[FactCell]:
    """Yield one :class:`FactCell` per ``Cell`` element, in document order."""
    for measures, entries in _iter_cells(source, diagnostics, with_attributes=False):
        yield FactCell(measures, tuple(DimensionRef(name, node) for name, node, _ in entries))


def parse_facts(
    source: bytes | str | os.PathLike | BinaryIO,
    diagnostics: list[ParseDiagnostic] | None = None,
) -> list[FactCell]:
    """Parse a ``TableFacts.xml`` document into its fact-cell list."""
    return list(iter_facts(source, diagnostics))


def iter_index_cells(
    source: bytes | str | os.PathLike | BinaryIO,
    diagnostics: list[ParseDiagnostic] | None = None,
) -> Iterator[IndexCell]:
    """Yield one :class:`IndexCell` per ``Cell`` element, in document order."""
    for measures, entries in _iter_cells(source, diagnostics, with_attributes=True):
        yield IndexCell(
            measures,
            tuple(IndexDimension(name, node, attrs) for name, node, attrs in entries),
        )


def parse_index(
    source: bytes | str | os.PathLike | BinaryIO,
    diagnostics: list[ParseDiagnostic] | None = None,
) -> JoinIndex:
    """Parse an ``Index.xml`` document into a :class:`JoinIndex`."""
    return JoinIndex(tuple(iter_index_cells(source, diagnostics)))


class _Writer:
    """Indented element writer over a binary stream."""

    def __init__(self, stream: BinaryIO):
        self._text = io.TextIOWrapper(stream, encoding="utf-8", newline="\n")
        self._text.write(_XML_DECLARATION)
        self._depth = 0

    def open(self, tag: str, *attrs: tuple[str, str]) -> None:
        self._line(tag, attrs, close=False)
        self._depth += 1

    def close(self, tag: str) -> None:
        self._depth -= 1
        self._text.write(f"{'  ' * self._depth}</{tag}>\n")

    def leaf(self, tag: str, *attrs: tuple[str, str]) -> None:
        self._line(tag, attrs, close=True)

    def _line(self, tag: str, attrs: tuple[tuple[str, str], ...], close: bool) -> None:
        rendered = "".join(f" {name}={quoteattr(value)}" for name, value in attrs)
        tail = "/>" if close else ">"
        self._text.write(f"{'  ' * self._depth}<{tag}{rendered}{tail}\n")

    def finish(self) -> None:
        self._text.flush()
        self._text.detach()


def write_dimensions(dimensions: Iterable[Dimension], stream: BinaryIO) -> None:
    """Stream a dimension list as a canonical ``Dimensions.xml`` document."""
    writer = _Writer(stream)
    dims = list(dimensions)
    writer.open("dimensionData")
    if not dims:
        writer.leaf("classification")
    else:
        writer.open("classification")
        for dim in dims:
            if not dim.nodes:
                writer.leaf("Level", ("node", dim.name))
                continue
            writer.open("Level", ("node", dim.name))
            for node in dim.nodes:
                if not node.attributes:
                    writer.leaf("node", ("id", node.id))
                    continue
                writer.open("node", ("id", node.id))
                for attr in node.attributes:
                    writer.leaf("attribute", ("name", attr.name), ("value", attr.value))
                writer.close("node")
            writer.close("Level")
        writer.close("classification")
    writer.close("dimensionData")
    writer.finish()


def _write_cells(
    cells: Iterable[tuple[tuple[Measure, ...], Iterable[tuple[str, str, tuple[AttributeKV, ...]]]]],
    stream: BinaryIO,
) -> None:
    writer = _Writer(stream)
    writer.open("CubeFacts")
    opened_cube = False
    for measures, entries in cells:
        if not opened_cube:
            writer.open("cube")
            opened_cube = True
        writer.open("Cell")
        for measure in measures:
            writer.leaf("Fact", ("id", measure.id), ("value", str(measure.value)))
        for name, node, attrs in entries:
            if not attrs:
                writer.leaf("dimension", ("id", name), ("node", node))
                continue
            writer.open("dimension", ("id", name), ("node", node))
            for attr in attrs:
                writer.leaf("attribute", ("name", attr.name), ("value", attr.value))
            writer.close("dimension")
        writer.close("Cell")
    if opened_cube:
        writer.close("cube")
    else:
        writer.leaf("cube")
    writer.close("CubeFacts")
    writer.finish()


def write_facts(cells: Iterable[FactCell], stream: BinaryIO) -> None:
    """Stream fact cells as a canonical ``TableFacts.xml`` document."""
    _write_cells(
        (
            (cell.measures, ((ref.dimension_name, ref.node_id, ()) for ref in cell.dimension_refs))
            for cell in cells
        ),
        stream,
    )


def write_index(index: JoinIndex, stream: BinaryIO) -> None:
    """Stream a join index as a canonical ``Index.xml`` document."""
    _write_cells(
        (
            (cell.facts, ((e.dimension_name, e.node_id, e.attributes) for e in cell.dimensions))
            for cell in index.cells
        ),
        stream,
    )


def serialize_dimensions(dimensions: Iterable[Dimension]) -> bytes:
    buffer = io.BytesIO()
    write_dimensions(dimensions, buffer)
    return buffer.getvalue()


def serialize_facts(cells: Iterable[FactCell]) -> bytes:
    buffer = io.BytesIO()
    write_facts(cells, buffer)
    return buffer.getvalue()


def serialize_index(index: JoinIndex) -> bytes:
    buffer = io.BytesIO()
    write_index(index, buffer)
    return buffer.getvalue()


def check_well_formed(source: bytes | str | os.PathLike | BinaryIO) -> None:
    """Scan a document for well-formedness only; contents are discarded."""
    with _as_stream(source) as stream:
        try:
            for _, elem in ET.iterparse(stream, events=("end",)):
                elem.clear()
        except ET.ParseError as exc:
            line, column = exc.position
            raise _fatal(
                f"malformed XML: {exc}", f"line {line}, column {column}"
            ) from exc


def load_warehouse(
    directory: str | os.PathLike,
    diagnostics: list[ParseDiagnostic] | None = None,
) -> Warehouse:
    """Load ``Dimensions.xml`` and ``TableFacts.xml`` from a directory.

    A ``Schema.xml`` sitting next to them is checked for well-formedness
    and otherwise ignored.
    """
    path = Path(directory)
    schema = path / SCHEMA_FILE
    if schema.exists():
        check_well_formed(schema)
    dimensions = parse_dimensions(path / DIMENSIONS_FILE, diagnostics)
    cells = parse_facts(path / FACTS_FILE, diagnostics)
    return Warehouse(tuple(dimensions), tuple(cells))


def write_warehouse(warehouse: Warehouse, directory: str | os.PathLike) -> tuple[Path, Path]:
    """Write both warehouse documents into a directory; returns their paths."""
    path = Path(directory)
    dimensions_path = path / DIMENSIONS_FILE
    facts_path = path / FACTS_FILE
    with open(dimensions_path, "wb") as stream:
        write_dimensions(warehouse.dimensions, stream)
    with open(facts_path, "wb") as stream:
        write_facts(warehouse.cells, stream)
    return dimensions_path, facts_path
