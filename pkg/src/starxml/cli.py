"""Command-line interface tying the toolkit together.

Subcommands: ``gen``, ``validate``, ``index``, ``query``, ``cost``, and
``bench``.  All tabular output is CSV on standard output or ``--out``.
Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 I/O
error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import platform
import statistics
import sys
import time
from hashlib import blake2b
from pathlib import Path
from typing import Callable, Iterator, NamedTuple, Sequence, TextIO

from . import costmodel, datagen, engine, indexer, xmlio
from .engine import ExecutionStats, Query, ResultRow
from .model import JoinIndex, Warehouse, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the CLI contract wants 1.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def result_checksum(rows: Sequence[ResultRow]) -> str:
    """64-bit hash over the canonical CSV of a (sorted) result-row list."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in rows:
        writer.writerow([v for _, _, v in row.key] + [str(row.value), str(row.cell_count)])
    return blake2b(buffer.getvalue().encode("utf-8"), digest_size=8).hexdigest()


def _write_result_rows(rows: Sequence[ResultRow], query: Query, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    header = [f"{g.dimension_name}.{g.attribute_name}" for g in query.group_by]
    writer.writerow(header + ["value", "cells"])
    for row in rows:
        writer.writerow([v for _, _, v in row.key] + [str(row.value), str(row.cell_count)])


@contextlib.contextmanager
def _open_out(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle


def _gen_spec(args: argparse.Namespace, cell_count: int | None = None) -> datagen.GenSpec:
    return datagen.GenSpec(
        dimension_count=args.dims,
        nodes_per_dimension=args.nodes,
        attrs_per_node=args.attrs,
        cell_count=args.cells if cell_count is None else cell_count,
        measures_per_cell=args.measures,
        seed=args.seed,
    )


def _query_from_args(args: argparse.Namespace) -> Query:
    return engine.build_query(args.agg, args.where or (), args.group_by or "")


def cmd_gen(args: argparse.Namespace) -> int:
    warehouse = datagen.generate(_gen_spec(args))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    xmlio.write_warehouse(warehouse, out_dir)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    warehouse = xmlio.load_warehouse(args.input)
    report = validate(warehouse)
    with _open_out(args.out) as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["locator", "message"])
        for violation in report.violations:
            writer.writerow([violation.locator, violation.message])
    return EXIT_OK if report.ok else EXIT_DATA


def cmd_index(args: argparse.Namespace) -> int:
    warehouse = xmlio.load_warehouse(args.input)
    index = indexer.build_index(warehouse)
    out_path = Path(args.out) if args.out else Path(args.input) / xmlio.INDEX_FILE
    with open(out_path, "wb") as stream:
        xmlio.write_index(index, stream)
    return EXIT_OK


def _load_for_query(args: argparse.Namespace) -> tuple[Warehouse | None, JoinIndex | None]:
    if args.path == "join":
        if args.input is None:
            raise _UsageError("--path join requires --in (the dimension documents)")
        return xmlio.load_warehouse(args.input), None
    if args.index is not None:
        return None, xmlio.parse_index(args.index)
    if args.input is None:
        raise _UsageError("--path index requires --in or --index")
    return None, indexer.build_index(xmlio.load_warehouse(args.input))


def cmd_query(args: argparse.Namespace) -> int:
    query = _query_from_args(args)
    warehouse, index = _load_for_query(args)
    if warehouse is not None:
        rows = engine.execute_join_path(warehouse, query)
    else:
        assert index is not None
        rows = engine.execute_index_path(index, query)
    with _open_out(args.out) as out:
        _write_result_rows(rows, query, out)
    return EXIT_OK


def cmd_cost(args: argparse.Namespace) -> int:
    if args.input is not None:
        params_list = [costmodel.params_from_warehouse(xmlio.load_warehouse(args.input))]
    else:
        missing = [n for n in ("cells", "dims", "nodes", "attrs") if getattr(args, n) is None]
        if missing:
            raise _UsageError(
                "cost needs --in or all of --cells/--dims/--nodes/--attrs"
            )
        params_list = [
            costmodel.CostParams(c, args.dims, args.nodes, args.attrs)
            for c in _parse_cell_list(args.cells)
        ]
    with _open_out(args.out) as out:
        out.write(costmodel.COST_CSV_HEADER + "\n")
        writer = csv.writer(out, lineterminator="\n")
        for params, est in costmodel.cost_sweep(params_list):
            writer.writerow(
                [
                    params.cell_count,
                    params.dimension_count,
                    params.nodes_per_dimension,
                    params.attrs_per_node,
                    est.without_index,
                    est.with_index,
                    costmodel.format_gain(est.gain),
                ]
            )
    return EXIT_OK


class BenchRow(NamedTuple):
    """One benchmark measurement: a query run on one path at one size."""

    cells: int
    path: str
    wall_clock_ms: float
    result_checksum: str
    join_comparisons: int
    node_visits: int


BENCH_CSV_HEADER = "cells,path,wall_clock_ms,result_checksum,join_comparisons,node_visits"


def environment_note() -> str:
    return (
        f"{platform.python_implementation()} {platform.python_version()}"
        f" on {platform.system()} {platform.machine()}"
    )


def _timed_runs(
    run: Callable[[ExecutionStats | None], list[ResultRow]],
    reps: int,
    stats: ExecutionStats,
) -> tuple[float, list[ResultRow]]:
    # Counters are deterministic across repetitions, so they are collected
    # on the first run only; the flush is two integer adds and does not
    # perturb the timing.
    timings = []
    rows: list[ResultRow] = []
    for i in range(max(1, reps)):
        started = time.perf_counter()
        rows = run(stats if i == 0 else None)
        timings.append((time.perf_counter() - started) * 1000.0)
    return statistics.median(timings), rows


def run_bench(
    base_spec: datagen.GenSpec,
    cell_counts: Sequence[int],
    query: Query,
    reps: int = 5,
) -> list[BenchRow]:
    """Generate, index, and time both execution paths per cell count.

    The reported time is the median over ``reps`` in-process runs of the
    query alone; generation, index build, and (de)serialization are
    excluded.  The two paths' checksums are verified to agree.
    """
    rows: list[BenchRow] = []
    for cells in cell_counts:
        spec = datagen.GenSpec(
            dimension_count=base_spec.dimension_count,
            nodes_per_dimension=base_spec.nodes_per_dimension,
            attrs_per_node=base_spec.attrs_per_node,
            cell_count=cells,
            measures_per_cell=base_spec.measures_per_cell,
            seed=base_spec.seed,
        )
        warehouse = datagen.generate(spec)
        index = indexer.build_index(warehouse)

        join_stats = ExecutionStats()
        join_ms, join_rows = _timed_runs(
            lambda s: engine.execute_join_path(warehouse, query, s), reps, join_stats
        )
        index_stats = ExecutionStats()
        index_ms, index_rows = _timed_runs(
            lambda s: engine.execute_index_path(index, query, s), reps, index_stats
        )

        join_sum = result_checksum(join_rows)
        index_sum = result_checksum(index_rows)
        if join_sum != index_sum:
            raise RuntimeError(
                f"path results diverge at {cells} cells: {join_sum} != {index_sum}"
            )
        rows.append(
            BenchRow(cells, "join", join_ms, join_sum,
                     join_stats.join_comparisons, join_stats.node_visits)
        )
        rows.append(
            BenchRow(cells, "index", index_ms, index_sum,
                     index_stats.join_comparisons, index_stats.node_visits)
        )
    return rows


def cmd_bench(args: argparse.Namespace) -> int:
    query = _query_from_args(args)
    base_spec = _gen_spec(args, cell_count=0)
    rows = run_bench(base_spec, _parse_cell_list(args.cells), query, args.reps)
    with _open_out(args.out) as out:
        out.write(f"# environment: {environment_note()}\n")
        out.write(BENCH_CSV_HEADER + "\n")
        writer = csv.writer(out, lineterminator="\n")
        for row in rows:
            writer.writerow(
                [
                    row.cells,
                    row.path,
                    f"{row.wall_clock_ms:.3f}",
                    row.result_checksum,
                    row.join_comparisons,
                    row.node_visits,
                ]
            )
    return EXIT_OK


def _parse_cell_list(text: str) -> list[int]:
    counts = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            value = int(part)
        except ValueError:
            raise _UsageError(f"invalid cell count '{part}'") from None
        if value < 0:
            raise _UsageError(f"invalid cell count '{part}'")
        counts.append(value)
    return counts


def _add_gen_flags(parser: argparse.ArgumentParser, with_cells_int: bool) -> None:
    parser.add_argument("--dims", type=int, default=5, help="dimension count")
    parser.add_argument("--nodes", type=int, default=50, help="nodes per dimension")
    parser.add_argument("--attrs", type=int, default=10, help="attributes per node")
    if with_cells_int:
        parser.add_argument("--cells", type=int, default=1000, help="fact cell count")
    parser.add_argument("--measures", type=int, default=1, help="measures per cell")
    parser.add_argument("--seed", type=int, default=0, help="generator seed")


def _add_query_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--agg", required=True, help="<sum|avg|count|min|max>:<measureId>")
    parser.add_argument(
        "--where", action="append", default=[], metavar="DIM.ATTR=VALUE",
        help="equality predicate, repeatable",
    )
    parser.add_argument(
        "--group-by", dest="group_by", default="", metavar="DIM.ATTR[,DIM.ATTR...]",
        help="comma-separated group-by keys",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="starxml", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate warehouse documents")
    _add_gen_flags(p_gen, with_cells_int=True)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=cmd_gen)

    p_validate = sub.add_parser("validate", help="check warehouse documents")
    p_validate.add_argument("--in", dest="input", required=True, help="input directory")
    p_validate.add_argument("--out", help="output file (default stdout)")
    p_validate.set_defaults(func=cmd_validate)

    p_index = sub.add_parser("index", help="materialize the join index")
    p_index.add_argument("--in", dest="input", required=True, help="input directory")
    p_index.add_argument("--out", help="output file (default <in>/Index.xml)")
    p_index.set_defaults(func=cmd_index)

    p_query = sub.add_parser("query", help="run a decisional query")
    p_query.add_argument("--in", dest="input", help="warehouse directory")
    p_query.add_argument("--index", help="Index.xml file (index path only)")
    p_query.add_argument("--path", required=True, choices=("join", "index"))
    _add_query_flags(p_query)
    p_query.add_argument("--out", help="output file (default stdout)")
    p_query.set_defaults(func=cmd_query)

    p_cost = sub.add_parser("cost", help="evaluate the analytical cost model")
    p_cost.add_argument("--in", dest="input", help="derive parameters from documents")
    p_cost.add_argument("--cells", help="comma-separated cell counts")
    p_cost.add_argument("--dims", type=int)
    p_cost.add_argument("--nodes", type=int)
    p_cost.add_argument("--attrs", type=int)
    p_cost.add_argument("--out", help="output file (default stdout)")
    p_cost.set_defaults(func=cmd_cost)

    p_bench = sub.add_parser("bench", help="time both paths over a cell-count sweep")
    _add_gen_flags(p_bench, with_cells_int=False)
    p_bench.add_argument("--cells", required=True, help="comma-separated cell counts")
    p_bench.add_argument("--reps", type=int, default=5, help="repetitions per measurement")
    _add_query_flags(p_bench)
    p_bench.add_argument("--out", help="output file (default stdout)")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and explicit exits
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:  # bad flag grammar (e.g. malformed --agg)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except xmlio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except indexer.InvalidWarehouseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for violation in exc.report.violations:
            print(f"  {violation.locator}: {violation.message}", file=sys.stderr)
        return EXIT_DATA
    except engine.QueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
