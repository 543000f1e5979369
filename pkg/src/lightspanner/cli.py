"""Command line front end: generate, build, verify, bench, render."""

from __future__ import annotations

import json
import logging
import sys
import time

import click
import numpy as np

from . import generators
from .fast_planar import fast_build
from .geometry import GeometryError
from .graph import GeometricGraph, GraphError, greedy_spanner, stretch_report
from .highdim import STP_PLUGINS, build_highdim_spanner
from .io import read_graph, read_points, write_graph, write_points
from .planar import build_planar_spanner
from .svg import render_svg

EXIT_VERIFY = 2
EXIT_INPUT = 3
ALGOS = ("planar", "fast-planar", "highdim", "greedy")


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def run(algo: str, points: np.ndarray, eps: float, seed: int = 0, prefilter_logn: bool = False,
        stp_plugin: str = "greedy"):
    """Build and verify one spanner; returns ``(graph, report)``."""
    d = points.shape[1]
    if algo in ("planar", "fast-planar") and d != 2:
        raise InputError(f"--algo {algo} needs 2-D points, got d={d}")
    if not 0 < eps < 1:
        raise InputError(f"--eps must lie in (0, 1), got {eps}")
    if len(points) > 1 and len(np.unique(points, axis=0)) < len(points):
        raise InputError("input has duplicate points")
    if algo == "planar":
        return build_planar_spanner(points, eps, prefilter_logn=prefilter_logn)
    if algo == "fast-planar":
        return fast_build(points, eps, seed=seed)
    if algo == "highdim":
        return build_highdim_spanner(points, eps, stp=stp_plugin, prefilter_logn=prefilter_logn, seed=seed)
    t0 = time.perf_counter()
    g = greedy_spanner(points, 1 + eps) if len(points) > 1 else GeometricGraph.from_points(points)
    return g, stretch_report(g, time.perf_counter() - t0, seed=seed)


def _report_dict(rep) -> dict:
    d = rep.to_dict()
    d["extra"] = {k: v for k, v in d["extra"].items() if k != "trees"}
    return d


def _load_points(path) -> np.ndarray:
    try:
        return read_points(path)
    except (GeometryError, OSError) as exc:
        raise InputError(str(exc)) from None


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose: bool) -> None:
    """Light Steiner spanners for Euclidean point sets."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@main.command()
@click.option("--kind", type=click.Choice(generators.KINDS), default="uniform")
@click.option("--n", "n", type=int, default=100, show_default=True)
@click.option("--dim", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--eps", type=float, default=0.25, show_default=True, help="spacing parameter for boundary-spaced")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def generate(kind, n, dim, seed, eps, out):
    """Write a seeded point set."""
    if n < 1 or dim < 1:
        raise InputError("--n and --dim must be positive")
    try:
        pts = generators.generate(kind, n, dim, seed, eps)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    write_points(out, pts)
    click.echo(f"wrote {len(pts)} points to {out}")


@main.command()
@click.argument("points", type=click.Path(exists=True, dir_okay=False))
@click.option("--algo", type=click.Choice(ALGOS), default="planar", show_default=True)
@click.option("--eps", type=float, default=0.25, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--prefilter-logn", is_flag=True, help="add all very short pairs directly first")
@click.option("--stp-plugin", type=click.Choice(sorted(STP_PLUGINS)), default="greedy", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="graph file to write")
@click.option("--report", type=click.Path(dir_okay=False), help="JSON report file")
def build(points, algo, eps, seed, prefilter_logn, stp_plugin, out, report):
    """Build a spanner and verify its stretch (exit 2 on failure)."""
    pts = _load_points(points)
    g, rep = run(algo, pts, eps, seed, prefilter_logn, stp_plugin)
    if out:
        write_graph(out, g)
    doc = _report_dict(rep)
    if report:
        with open(report, "w") as fh:
            json.dump(doc, fh, indent=1, default=str)
    click.echo(f"{algo}: n={rep.n_points} stretch={rep.max_stretch:.6f} lightness={rep.lightness:.4f} "
               f"edges={rep.n_edges} steiner={rep.n_steiner} time={rep.elapsed:.2f}s")
    if not rep.max_stretch <= 1 + eps:
        click.echo(f"verification failed: worst pair {rep.worst_pair}", err=True)
        sys.exit(EXIT_VERIFY)


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--eps", type=float, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
def verify(graph, eps, seed):
    """Check a stored graph's stretch over its input points."""
    try:
        g = read_graph(graph)
    except (GraphError, GeometryError) as exc:
        raise InputError(str(exc)) from None
    rep = stretch_report(g, seed=seed)
    mode = "exact" if rep.exact else f"sampled {rep.pairs_checked} pairs"
    click.echo(f"stretch={rep.max_stretch:.6f} ({mode}) lightness={rep.lightness:.4f}")
    if not rep.max_stretch <= 1 + eps:
        click.echo(f"verification failed: worst pair {rep.worst_pair}", err=True)
        sys.exit(EXIT_VERIFY)


@main.command()
@click.option("--algo", "algos", type=click.Choice(ALGOS), multiple=True)
@click.option("--kind", type=click.Choice(generators.KINDS), default="uniform")
@click.option("--n", "ns", type=int, multiple=True)
@click.option("--dim", type=int, default=2, show_default=True)
@click.option("--eps", "epss", type=float, multiple=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="write rows as JSON lines")
def bench(algos, kind, ns, dim, epss, seed, out):
    """Table of stretch, lightness and time over algorithms, sizes and eps."""
    algos = algos or (("planar", "greedy") if dim == 2 else ("highdim", "greedy"))
    ns = ns or (100,)
    epss = epss or (0.25,)
    rows = []
    click.echo(f"{'algo':<12}{'n':>8}{'eps':>9}{'stretch':>11}{'lightness':>11}{'edges':>9}{'steiner':>9}{'time':>9}")
    failed = False
    for n in ns:
        for eps in epss:
            try:
                pts = generators.generate(kind, n, dim, seed, eps)
            except ValueError as exc:
                raise InputError(str(exc)) from None
            for algo in algos:
                g, rep = run(algo, pts, eps, seed)
                failed |= not rep.max_stretch <= 1 + eps
                rows.append({"algo": algo, "kind": kind, "n": len(pts), "eps": eps, **_report_dict(rep)})
                click.echo(f"{algo:<12}{len(pts):>8}{eps:>9.4g}{rep.max_stretch:>11.5f}{rep.lightness:>11.3f}"
                           f"{rep.n_edges:>9}{rep.n_steiner:>9}{rep.elapsed:>9.2f}")
    if out:
        with open(out, "w") as fh:
            for r in rows:
                fh.write(json.dumps(r, default=str) + "\n")
    if failed:
        sys.exit(EXIT_VERIFY)


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def render(graph, out):
    """Draw a planar graph file as SVG."""
    try:
        g = read_graph(graph)
        render_svg(g, out)
    except (GraphError, GeometryError) as exc:
        raise InputError(str(exc)) from None
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
