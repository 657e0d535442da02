"""Command-line entry point.

Exit codes: 0 embedding found, 1 certified NO, 2 budget exceeded, 3 input error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import harness
from .approx import NoCEmbedding, approx_embed
from .embedding_model import Embedding, PatternGraph, distortion, embedding_to_json, frac_str, pattern_to_text
from .errors import ArtifactError, BudgetError, ParamError
from .fpt import DEFAULT_FPT_BUDGET, No, fpt_embed
from .graph_core import Graph, parse_graph, to_dot, to_edge_list
from .line_embed import DEFAULT_BUDGET, CertifiedNo, line_embed_approx, line_embed_exact, min_line_distortion_oracle

EXIT_EMBED, EXIT_NO, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3
FORMATS = click.Choice(["json", "csv", "dot"])


def _load_graph(path: str) -> Graph:
    return parse_graph(Path(path).read_text())


def _load_pattern(spec: str) -> PatternGraph:
    """A pattern file, or a name such as K2, K3 or K13."""
    p = Path(spec)
    return harness.named_pattern(p.read_text() if p.exists() else spec)


def host_dot(e: Embedding) -> str:
    """DOT for the host: pattern edges labelled with their lengths and the images they carry."""
    p = e.host.pattern
    on_edge: dict[int, list[str]] = {}
    at_vertex: dict[int, str] = {}
    for x, pt in enumerate(e.image):
        if pt.is_vertex:
            at_vertex[pt.vertex] = e.source.labels[x]
        else:
            on_edge.setdefault(pt.edge, []).append(f"{e.source.labels[x]}@{frac_str(pt.offset)}")
    lines = ["graph host {"]
    for v in range(p.n):
        extra = f" [{at_vertex[v]}]" if v in at_vertex else ""
        lines.append(f'  "{p.labels[v]}" [label="{p.labels[v]}{extra}"];')
    for eid, (u, v) in enumerate(p.edges):
        label = f"{frac_str(e.host.lengths[eid])}: " + " ".join(on_edge.get(eid, []))
        lines.append(f'  "{p.labels[u]}" -- "{p.labels[v]}" [label="{label.strip()}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _emit_embedding(e: Embedding, fmt: str) -> None:
    rep = distortion(e)
    if fmt == "json":
        out = embedding_to_json(e)
        out["distortion"] = frac_str(rep.distortion)
        click.echo(json.dumps(out, indent=2, sort_keys=True))
    elif fmt == "csv":
        click.echo("verdict,distortion")
        click.echo(f"EMBED,{frac_str(rep.distortion)}")
    else:
        click.echo(host_dot(e), nl=False)


def _emit_no(reason: str, fmt: str) -> None:
    if fmt == "csv":
        click.echo("verdict,distortion")
        click.echo("NO,")
    else:
        click.echo(json.dumps({"verdict": "NO", "reason": reason}))


def _run(fn) -> None:
    """Map package errors onto exit codes."""
    try:
        code = fn()
    except BudgetError as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    except (ArtifactError, OSError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    sys.exit(code or 0)


@click.group()
def main() -> None:
    """Low-distortion embeddings of graphs into subdivisions of a pattern graph."""


@main.command()
@click.option("--family", required=True, type=click.Choice(harness.FAMILIES + ("subdivided-H",)))
@click.option("--seed", default=0, type=int)
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE",
              help="Generator parameter, e.g. n=8 or pendants=0.2 (repeatable).")
@click.option("--pattern", "pattern_out", default=None, help="Also write the pattern to this file.")
@click.option("--format", "fmt", default="json", type=FORMATS, help="json/csv print the edge list; dot prints DOT.")
def gen(family: str, seed: int, params: tuple[str, ...], pattern_out: str | None, fmt: str) -> None:
    """Generate an instance and print the graph."""

    def go() -> int:
        kw = {}
        for item in params:
            key, sep, val = item.partition("=")
            if not sep:
                raise ParamError(f"expected KEY=VALUE, got {item!r}")
            kw[key] = _parse_value(val)
        g, h = harness.generate(harness.InstanceSpec.make(family, seed, **kw))
        click.echo(to_dot(g) if fmt == "dot" else to_edge_list(g), nl=False)
        if pattern_out:
            Path(pattern_out).write_text(pattern_to_text(h))
        return EXIT_EMBED

    _run(go)


def _parse_value(val: str):
    for conv in (int, float):
        try:
            return conv(val)
        except ValueError:
            pass
    return val


@main.command("embed-line")
@click.option("--graph", "graph_path", required=True)
@click.option("--c", "c", required=True, type=int)
@click.option("--budget", default=DEFAULT_BUDGET, type=int)
@click.option("--approx", "use_approx", is_flag=True, help="Use the BFS-layer approximation instead of the exact search.")
@click.option("--format", "fmt", default="json", type=FORMATS)
def embed_line(graph_path: str, c: int, budget: int, use_approx: bool, fmt: str) -> None:
    """Embed into the line with distortion at most c (exact search by default)."""

    def go() -> int:
        g = _load_graph(graph_path)
        if use_approx:
            res = line_embed_approx(g, c)
            if isinstance(res, CertifiedNo):
                _emit_no(f"layer certificate {res.witnesses}", fmt)
                return EXIT_NO
        else:
            res = line_embed_exact(g, c, budget=budget)
            if res is None:
                _emit_no("no ordering fits", fmt)
                return EXIT_NO
        _emit_embedding(res.to_embedding(g), fmt)
        return EXIT_EMBED

    _run(go)


@main.command()
@click.option("--graph", "graph_path", required=True)
@click.option("--pattern", "pattern", required=True, help="Pattern file or a name such as K3.")
@click.option("--c", "c", required=True, type=int)
@click.option("--format", "fmt", default="json", type=FORMATS)
@click.option("--trace", is_flag=True, help="Print the cover families per subpattern to stderr.")
def approx(graph_path: str, pattern: str, c: int, fmt: str, trace: bool) -> None:
    """Approximate embedding with a guaranteed distortion bound."""

    def go() -> int:
        g, h = _load_graph(graph_path), _load_pattern(pattern)
        log: list | None = [] if trace else None
        res = approx_embed(g, h, c, trace=log)
        if log is not None:
            click.echo(json.dumps(log, indent=1), err=True)
        if isinstance(res, NoCEmbedding):
            _emit_no(res.reason, fmt)
            return EXIT_NO
        _emit_embedding(res, fmt)
        return EXIT_EMBED

    _run(go)


@main.command()
@click.option("--graph", "graph_path", required=True)
@click.option("--pattern", "pattern", required=True, help="Pattern file or a name such as K3.")
@click.option("--c", "c", required=True, type=int)
@click.option("--budget", default=DEFAULT_FPT_BUDGET, type=int)
@click.option("--no-gadget", is_flag=True, help="Skip the clique-gadget route.")
@click.option("--format", "fmt", default="json", type=FORMATS)
@click.option("--trace", is_flag=True, help="Print search statistics to stderr.")
def fpt(graph_path: str, pattern: str, c: int, budget: int, no_gadget: bool, fmt: str, trace: bool) -> None:
    """Exact decision: an embedding with distortion at most c, or NO."""

    def go() -> int:
        g, h = _load_graph(graph_path), _load_pattern(pattern)
        stats: dict = {}
        try:
            res = fpt_embed(g, h, c, budget=budget, gadget=not no_gadget, stats=stats)
        finally:
            if trace:
                click.echo(json.dumps(stats, default=str), err=True)
        if isinstance(res, No):
            _emit_no(res.reason, fmt)
            return EXIT_NO
        _emit_embedding(res, fmt)
        return EXIT_EMBED

    _run(go)


@main.command()
@click.argument("embedding_file")
@click.option("--graph", "graph_path", required=True)
def verify(embedding_file: str, graph_path: str) -> None:
    """Check an embedding file; exits 1 when it contracts some pair."""

    def go() -> int:
        rep, code = harness.verify_command(embedding_file, graph_path)
        click.echo(json.dumps(rep, indent=2, sort_keys=True))
        return code

    _run(go)


@main.command()
@click.option("--graph", "graph_path", required=True)
@click.option("--pattern", "pattern", default="K2", show_default=True, help="K2 for the line, K3 for line or cycle.")
@click.option("--format", "fmt", default="json", type=FORMATS)
def oracle(graph_path: str, pattern: str, fmt: str) -> None:
    """Brute-force minimum distortion for small graphs."""

    def go() -> int:
        g, h = _load_graph(graph_path), _load_pattern(pattern)
        if harness.oracle_optimum(g, h) is None:
            raise ParamError("no oracle for this pattern and size (K2 needs n <= 9, K3 needs n <= 8)")
        if h.h == 1:
            value, le = min_line_distortion_oracle(g)
            e = le.to_embedding(g)
        else:
            value, e = harness.min_cycle_distortion_oracle(g)
        if fmt == "json":
            out = embedding_to_json(e)
            out["optimum"] = frac_str(value)
            click.echo(json.dumps(out, indent=2, sort_keys=True))
        else:
            _emit_embedding(e, fmt)
        return EXIT_EMBED

    _run(go)


@main.command()
@click.option("--family", required=True, type=click.Choice(harness.FAMILIES + ("subdivided-H", "corpus")))
@click.option("--seeds", default=10, type=int, help="Number of seeds (instances) to run.")
@click.option("--seed", default=0, type=int, help="First seed.")
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE")
@click.option("--algos", default="approx,fpt,oracle", show_default=True)
@click.option("--c", "c", default=1, type=int)
@click.option("--budget", default=DEFAULT_FPT_BUDGET, type=int)
@click.option("--workers", default=1, type=int)
@click.option("--format", "fmt", default="csv", type=FORMATS)
def bench(family: str, seeds: int, seed: int, params: tuple[str, ...], algos: str, c: int, budget: int,
          workers: int, fmt: str) -> None:
    """Run algorithms over seeded instances and print one CSV row per (instance, algorithm)."""

    def go() -> int:
        if family == "corpus":
            specs = harness.small_corpus(seeds, seed or 20240601)
        else:
            kw = {}
            for item in params:
                key, sep, val = item.partition("=")
                if not sep:
                    raise ParamError(f"expected KEY=VALUE, got {item!r}")
                kw[key] = _parse_value(val)
            specs = [harness.InstanceSpec.make(family, seed + i, **kw) for i in range(seeds)]
        names = tuple(a.strip() for a in algos.split(",") if a.strip())
        for a in names:
            if a not in harness.ALGORITHMS:
                raise ParamError(f"unknown algorithm {a!r}")
        rows = harness.bench(specs, names, c=c, budget=budget, workers=workers)
        if fmt == "json":
            click.echo(json.dumps([dict(zip(harness.CSV_COLUMNS, r.row())) for r in rows], indent=1))
        else:
            click.echo(harness.records_to_csv(rows), nl=False)
        return EXIT_EMBED

    _run(go)


if __name__ == "__main__":
    main()
