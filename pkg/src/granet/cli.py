"""Command-line entry point: ``granet gen|cluster|render|oracle``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import assembly
from .cluster import ClusterConfig, cluster, write_trace
from .errors import DataError, GranetError, MetricError
from .graph import DEFAULT_CONTACT_TOLERANCE, Partition, build_contact_network
from .metrics import MetricConfig, MetricKind, build_context, modularity
from .render import default_slice_positions, render_2d, render_slices

log = logging.getLogger("granet")

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_METRIC = 4


class UsageError(GranetError):
    pass


def _floats(text, count=None):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"not a list of numbers: {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _read_kv_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line without '=': {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------- gen

def _cmd_gen(args):
    extra = _read_kv_config(args.config) if args.config else {}

    def pick(name, cast, default):
        value = getattr(args, name, None)
        if value is None:
            value = extra.get(name)
        return default if value is None else cast(value)

    if args.structure == "tri-grain":
        base = assembly.TriGrainConfig()
        seeds = pick("seeds", str, None)
        if seeds is not None:
            seeds = tuple(tuple(_floats(s, 2)) for s in seeds.split(";"))
        orient = pick("orientations", str, None)
        cfg = assembly.TriGrainConfig(
            orientations=tuple(_floats(orient, 3)) if orient else base.orientations,
            seeds=seeds or base.seeds,
            width=pick("width", float, base.width),
            height=pick("height", float, base.height),
            spacing=pick("spacing", float, base.spacing),
        )
        particles = assembly.gen_tri_grain(cfg)
    elif args.structure == "four-block":
        n = pick("n", int, 8)
        cfg = assembly.FourBlockConfig(
            nx=pick("nx", int, n), ny=pick("ny", int, n), nz=pick("nz", int, n),
            spacing=pick("spacing", float, 1.0),
        )
        particles = assembly.gen_four_block(cfg)
    else:
        particles = assembly.gen_hex_patch(
            pick("width", float, 25.0), pick("height", float, 25.0),
            pick("spacing", float, 1.0), pick("angle", float, 0.0),
        )
    assembly.write_particles(particles, args.out)
    return 0


# ------------------------------------------------------------ cluster

def _load(args):
    src = args.inp
    if src is None:
        if sys.stdin is None or sys.stdin.isatty():
            raise UsageError("no input: pass --in <csv> or pipe particles on stdin")
        src = "-"
    particles, mapping = assembly.read_particles(src, return_mapping=True)
    if not particles:
        raise DataError("input holds no particles")
    original = np.empty(len(mapping), dtype=np.int64)
    for old, new in mapping.items():
        original[new] = old
    g = build_contact_network(particles, args.contact_tolerance)
    return g, original


def _metric_config(args) -> MetricConfig:
    return MetricConfig(bin_width=args.bin_width, cutoff=args.cutoff, radiation_form=args.radiation_form)


def write_labels(path, original_ids, p: Partition):
    order = np.argsort(original_ids, kind="stable")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("id,community\n")
        for i in order.tolist():
            fh.write(f"{original_ids[i]},{p.labels[i]}\n")


def read_labels(path, original_ids) -> Partition:
    lookup = {int(old): new for new, old in enumerate(original_ids.tolist())}
    labels = np.full(len(original_ids), -1, dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "id,community":
            raise DataError(f"unexpected labels header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                pid, cid = (int(v) for v in line.split(","))
                labels[lookup[pid]] = cid
            except (ValueError, KeyError):
                raise DataError(f"labels line {lineno}: bad row {line.strip()!r}") from None
    if np.any(labels < 0):
        raise DataError("labels file does not cover every particle")
    return Partition(labels)


def _slices(args, g):
    if args.slices:
        return _floats(args.slices)
    return default_slice_positions(g)


def _cmd_cluster(args):
    kind = MetricKind.parse(args.metric)
    g, original = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    cfg = ClusterConfig(metric=_metric_config(args), max_passes=args.max_passes)
    ctx = build_context(g, kind, cfg.metric)
    run = cluster(g, kind, cfg, ctx=ctx)
    wall_ms = (time.perf_counter() - t0) * 1000.0

    p = run.partition.canonical()
    q = modularity(ctx, p)
    sizes = p.sizes()
    write_labels(out / "labels.csv", original, p)
    with open(out / "sizes.csv", "w", encoding="utf-8") as fh:
        fh.write("rank,size\n")
        for rank, size in enumerate(sizes, start=1):
            fh.write(f"{rank},{size}\n")
    report = {
        "metric": kind.value,
        "q": q,
        "n_nodes": g.n_nodes,
        "n_edges": g.n_edges,
        "n_communities": p.q,
        "sizes": sizes,
        "wall_ms": round(wall_ms, 3),
        "config": {
            "contact_tolerance": args.contact_tolerance,
            "bin_width": args.bin_width,
            "cutoff": args.cutoff,
            "radiation_form": args.radiation_form,
            "max_passes": args.max_passes,
            "converged": run.converged,
            "node_passes": run.node_passes,
            "community_passes": run.community_passes,
        },
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    if args.trace:
        write_trace(run, args.trace)
    if args.edgelist:
        g.write_edgelist(out / "edges.txt")
    if args.plot:
        if g.dimension == 2:
            render_2d(g, p, out / "partition.svg", title=f"{kind.value} partition")
        else:
            render_slices(g, p, _slices(args, g), out / "partition")
    log.info("%s: q=%.6f, %d communities, %.0f ms", kind.value, q, p.q, wall_ms)
    print(json.dumps({k: report[k] for k in ("metric", "q", "n_nodes", "n_communities")}))
    return 0


def _cmd_render(args):
    g, original = _load(args)
    p = read_labels(args.labels, original)
    if g.dimension == 2:
        render_2d(g, p, args.out)
    else:
        prefix = str(args.out)
        if prefix.endswith(".svg"):
            prefix = prefix[:-4]
        render_slices(g, p, _slices(args, g), prefix)
    return 0


def _cmd_oracle(args):
    from .oracle import exhaustive_best_partition

    g, _ = _load(args)
    res = exhaustive_best_partition(g, args.metric, _metric_config(args), n_max=args.n_max)
    print(json.dumps({"metric": args.metric, "q": res.q, "labels": list(res.rgs), "examined": res.examined}))
    return 0


# --------------------------------------------------------------- main

def _add_input(sp):
    sp.add_argument("--in", dest="inp", help="particle CSV (default: stdin)")
    sp.add_argument("--contact-tolerance", type=float, default=DEFAULT_CONTACT_TOLERANCE)


def _add_metric(sp, required=True):
    sp.add_argument("--metric", choices=[k.value for k in MetricKind], required=required,
                    default=None if required else "nature")
    sp.add_argument("--bin-width", type=float, default=None)
    sp.add_argument("--cutoff", type=float, default=None)
    sp.add_argument("--radiation-form", choices=["paper", "simini"], default="paper")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="granet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic assembly as particle CSV")
    gen.add_argument("structure", choices=["tri-grain", "four-block", "hex-patch"])
    gen.add_argument("--out", default="-", help="output CSV (default: stdout)")
    gen.add_argument("--config", help="key = value file; flags override it")
    gen.add_argument("--n", type=int, help="four-block lattice count per axis")
    for name in ("nx", "ny", "nz"):
        gen.add_argument(f"--{name}", type=int)
    for name in ("width", "height", "spacing", "angle"):
        gen.add_argument(f"--{name}", type=float)
    gen.add_argument("--orientations", help="three angles in degrees, e.g. 0,19,41")
    gen.add_argument("--seeds", help="three seed points, e.g. '20,32;9.6,14;30.4,14'")
    gen.set_defaults(func=_cmd_gen)

    cl = sub.add_parser("cluster", help="partition a particle assembly")
    _add_input(cl)
    _add_metric(cl, required=False)
    cl.add_argument("--out-dir", default="granet_out")
    cl.add_argument("--max-passes", type=int, default=None)
    cl.add_argument("--trace", help="write the (phase, step, q) trace as CSV")
    cl.add_argument("--plot", action="store_true", help="write SVG figures")
    cl.add_argument("--slices", help="z positions for 3D slices, e.g. 1,4,6")
    cl.add_argument("--edgelist", action="store_true", help="also write edges.txt")
    cl.set_defaults(func=_cmd_cluster)

    rd = sub.add_parser("render", help="draw a labels.csv over its assembly")
    _add_input(rd)
    rd.add_argument("--labels", required=True)
    rd.add_argument("--out", required=True)
    rd.add_argument("--slices")
    rd.set_defaults(func=_cmd_render)

    orc = sub.add_parser("oracle", help=argparse.SUPPRESS)
    _add_input(orc)
    _add_metric(orc)
    orc.add_argument("--n-max", type=int, default=10)
    orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"granet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"granet: invalid data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MetricError as exc:
        print(f"granet: metric error: {exc}", file=sys.stderr)
        return EXIT_METRIC
    except FileNotFoundError as exc:
        print(f"granet: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
