"""Command-line interface: ``islnet generate|topology|route|experiment``.

Exit codes: 0 success, 1 usage, 2 I/O, 3 no path.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys

from . import __version__
from .constellation import Constellation, generate_random, generate_walker_delta, generate_walker_star
from .experiments import (
    ExperimentConfig,
    bucket_improvement,
    city_pair_study,
    compare_constellations,
    load_cities,
    round_to_planes,
    summarize,
    sweep_improvement,
)
from .geometry import GeodeticCoord, footprint_spec, great_circle_distance
from .routing import DelayModel, NoPathError, alternate_paths, fiber_delay, improvement, route
from .topology import IslGraph, build_cutoff, build_nearest_hop, compute_d_max

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NO_PATH = 0, 1, 2, 3

log = logging.getLogger("islnet")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _load_constellation(path) -> Constellation:
    try:
        return Constellation.from_json(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: unreadable constellation file ({exc})") from exc


def _load_graph(path) -> IslGraph:
    try:
        return IslGraph.from_csv(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: unreadable edge list ({exc})") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _hash(args: argparse.Namespace) -> str:
    d = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}
    return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _latlon(text: str) -> GeodeticCoord:
    try:
        lat, lon = (float(v) for v in text.split(","))
        return GeodeticCoord.from_degrees(lat, lon)
    except ValueError as exc:
        raise UsageError(f"expected 'lat,lon' in degrees, got {text!r}") from exc


def _delay_model(args) -> DelayModel:
    kw = {"refractive_index": args.refractive_index}
    m = DelayModel.derived(**kw) if args.derived_processing else DelayModel(**kw)
    return m.without_processing() if args.no_processing else m


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.kind != "random" and args.p is None:
        raise UsageError("--p is required for Walker constellations")
    n = args.n
    if args.kind != "random" and args.round_to_planes:
        n = round_to_planes(n, args.p)
        if n != args.n:
            log.warning("N rounded from %d to %d for %d equal planes", args.n, n, args.p)
    if args.kind == "random":
        c = generate_random(args.n, args.alt, args.seed)
    elif args.kind == "walker-star":
        inc = 90.0 if args.inclination is None else args.inclination
        c = generate_walker_star(n, args.p, args.alt, math.radians(inc))
    else:
        inc = 53.0 if args.inclination is None else args.inclination
        c = generate_walker_delta(n, args.p, args.alt, math.radians(inc), args.phasing)
    c.to_json(args.out)
    print(json.dumps({"kind": c.kind.value, "N": c.n, "P": c.p, "seed": c.seed,
                      "altitude_km": c.altitude_km, "out": args.out, "config_hash": _hash(args)}))
    return EXIT_OK


def cmd_topology(args) -> int:
    c = _load_constellation(args.constellation)
    if args.kind == "cutoff":
        if args.d_max == "auto":
            d_max = compute_d_max(c.altitude_km, args.troposphere)
        else:
            d_max = float(args.d_max)
        g = build_cutoff(c, d_max)
    else:
        g = build_nearest_hop(c, min(args.candidates, c.n - 1), max_degree=args.max_degree)
    g.to_csv(args.out)
    print(json.dumps({**g.summary(), "out": args.out, "config_hash": _hash(args)}))
    return EXIT_OK


def cmd_route(args) -> int:
    c = _load_constellation(args.constellation)
    g = _load_graph(args.graph)
    if g.node_count != c.n:
        raise InputError("edge list and constellation have different satellite counts")
    tx, rx = _latlon(args.tx), _latlon(args.rx)
    model = _delay_model(args)
    min_el = math.radians(args.min_elevation)
    d_gc = great_circle_distance(tx, rx)
    fib = fiber_delay(d_gc, model)
    try:
        if args.alternates:
            alt = alternate_paths(c, g, tx, rx, model, k=args.alternates, min_elevation_rad=min_el)
            paths, truncated = alt.paths, alt.truncated
            if not paths:
                raise NoPathError("no path between the attach satellites")
        else:
            paths, truncated = [route(c, g, tx, rx, model, min_elevation_rad=min_el)], False
    except NoPathError as exc:
        print(json.dumps({"error": "no_path", "detail": str(exc), "config_hash": _hash(args)}))
        return EXIT_NO_PATH
    best = paths[0]
    report = {
        **best.to_dict(),
        "d_gc_km": d_gc,
        "fiber_delay_s": fib,
        "improvement": improvement(fib, best.total_delay_s),
        "config_hash": _hash(args),
    }
    if args.alternates:
        report["alternates"] = [
            {"rank": i, "delay_s": p.total_delay_s, "hop_count": p.hop_count, "sat_ids": list(p.sat_ids)}
            for i, p in enumerate(paths)
        ]
        report["truncated"] = truncated
    print(json.dumps(report, indent=1))
    if args.geojson:
        from . import geojson

        phi = footprint_spec(c.altitude_km, min_el).phi_rad
        feats = [geojson.route_feature(c, p, rank=i) for i, p in enumerate(paths)]
        feats += [geojson.footprint_feature(c, s, phi) for s in sorted({best.sat_ids[0], best.sat_ids[-1]})]
        geojson.dump(geojson.feature_collection(feats), args.geojson)
    return EXIT_OK


def _apply_overrides(data: dict, items) -> dict:
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--set expects section.key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        *path, leaf = key.split(".")
        for part in path:
            node = node.setdefault(part, {})
        node[leaf] = value
    return data


def _load_experiment_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
    data = _apply_overrides(data, args.set)
    top = data.setdefault("experiment", {})
    if args.seed is not None:
        top["master_seed"] = args.seed
    if args.trials is not None:
        top["trial_count"] = args.trials
    return ExperimentConfig.from_dict(data)


def cmd_experiment(args) -> int:
    cfg = _load_experiment_config(args)
    if args.name == "sweep":
        rs = sweep_improvement(cfg)
    elif args.name == "compare":
        rs = compare_constellations(cfg)
    else:
        if args.pair:
            pairs = [tuple(p.split(":", 1)) for p in args.pair]
        elif cfg.endpoints.pairs:
            pairs = list(cfg.endpoints.pairs)
        else:
            pairs = load_cities()["pairs"]
        rs = city_pair_study(pairs, cfg)
    if args.out_csv:
        rs.to_csv(args.out_csv)
    if args.out_json:
        rs.to_json(args.out_json)
    summary = {"experiment": args.name, "config_hash": cfg.config_hash(), "rows": len(rs)}
    if args.name == "cities":
        summary["arms"] = _city_summary(rs)
    else:
        failed = sum(1 for r in rs.rows if r["failed"])
        summary["failed"] = failed
        summary["arms"] = summarize(rs)
        if args.name == "sweep":
            summary["buckets"] = bucket_improvement(rs, cfg.bin_km)
        if rs.rows and failed == len(rs.rows):
            print(json.dumps(summary, indent=1))
            return EXIT_NO_PATH
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def _city_summary(rs) -> list[dict]:
    arms: dict = {}
    for r in rs.rows:
        arms.setdefault((r["pair"], r["constellation"], r["topology"]), []).append(r)
    return [
        {"pair": pair, "constellation": kind, "topology": topo,
         "fiber_delay_ms": rows[0]["fiber_delay_s"] * 1e3,
         "delays_ms": [r["sat_delay_s"] * 1e3 for r in rows],
         "truncated": rows[0]["truncated"]}
        for (pair, kind, topo), rows in arms.items()
    ]


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="islnet", description="LEO inter-satellite-link network simulator")
    ap.add_argument("--version", action="version", version=f"islnet {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a constellation JSON file")
    p.add_argument("--kind", choices=["random", "walker-star", "walker-delta"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--alt", type=float, default=550.0, help="altitude, km")
    p.add_argument("--inclination", type=float, help="degrees (Walker kinds)")
    p.add_argument("--phasing", type=int, default=0, help="Walker-Delta phasing factor F")
    p.add_argument("--round-to-planes", action="store_true",
                   help="round N to the nearest multiple of P instead of failing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="constellation.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("topology", help="build an ISL edge list")
    p.add_argument("--constellation", required=True)
    p.add_argument("--kind", choices=["cutoff", "nearest-hop"], default="cutoff")
    p.add_argument("--d-max", default="auto", help="km, or 'auto' for the troposphere-grazing limit")
    p.add_argument("--troposphere", type=float, default=18.0, help="grazing altitude for --d-max auto, km")
    p.add_argument("--candidates", type=int, default=16)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--out", default="edges.csv")
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("route", help="route between two ground points")
    p.add_argument("--constellation", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--tx", required=True, help="'lat,lon' degrees")
    p.add_argument("--rx", required=True, help="'lat,lon' degrees")
    p.add_argument("--alternates", type=int, default=0, help="successive link-disjoint paths")
    p.add_argument("--refractive-index", type=float, default=1.468)
    p.add_argument("--no-processing", action="store_true")
    p.add_argument("--derived-processing", action="store_true", help="tau = instructions / clock")
    p.add_argument("--min-elevation", type=float, default=25.0, help="degrees; lower attachments are logged")
    p.add_argument("--geojson")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("experiment", help="run a batch experiment")
    p.add_argument("name", choices=["sweep", "compare", "cities"])
    p.add_argument("--config", help="TOML file")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--pair", action="append", metavar="CITY:CITY")
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.set_defaults(func=cmd_experiment)
    return ap


def _glue_coordinates(argv):
    # "--tx -31.9,115.8" would otherwise parse the value as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--tx", "--rx"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = _glue_coordinates(sys.argv[1:] if argv is None else list(argv))
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"islnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InputError) as exc:
        print(f"islnet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"islnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
