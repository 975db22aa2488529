"""Command-line entry point: ``horolab <subcommand> ...``.

Exit codes: 0 success, 2 invalid configuration, 3 resource cap reached,
4 precondition failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import classify as cl
from . import config as cf
from . import experiments as ex
from . import measures as ms
from . import render
from .errors import HorolabError, InsufficientDataError, ResourceError
from .groups import enumerate_orbit
from .words import format_word

EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_PRECONDITION = 4

PROBES = {
    "myr-in-horo": ex.probe_myr_in_horo,
    "measure-diff": ex.probe_measure_difference,
    "expnew": ex.reproduce_expnew,
    "dimension": ex.dimension_sweep,
}


def _presentation(ref):
    """A presentation from a presentation file, a shipped name, or an experiment file."""
    path = Path(ref)
    if path.exists():
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as err:
            raise cf.ConfigError(f"{ref}: invalid JSON ({err})") from err
        if obj.get("schema") == "horolab.experiment":
            return cf.load_experiment(path).presentation
        return cf.presentation_from_dict(obj)
    return cf.load_presentation(ref)


def _emit(text, out, filename):
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / filename, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _orbit_table(orbit):
    cols = ["x", "y", "z"][: orbit.dim]
    rows = ["word,distance," + ",".join(cols)]
    for w, d, p in zip(orbit.words, orbit.distances, orbit.points):
        rows.append(f"{format_word(w, orbit.presentation.names if orbit.presentation else None)},{d:.12f},"
                    + ",".join(f"{c:.15f}" for c in p))
    return "\n".join(rows) + "\n"


def cmd_enumerate(args):
    pres = _presentation(args.config)
    orbit = enumerate_orbit(pres, np.zeros(pres.dim), args.radius or 10.0)
    _emit(_orbit_table(orbit), args.out, "orbit.csv")
    return 0


def cmd_delta(args):
    pres = _presentation(args.config)
    R = args.radius or 30.0
    window = tuple(args.window) if args.window else (R / 2, R)
    orbit = enumerate_orbit(pres, np.zeros(pres.dim), R)
    delta, se = ms.critical_exponent_estimate(orbit, window)
    radii = np.arange(1.0, R + 1e-9, 0.25)
    counts = orbit.counts(radii)
    rows = [f"# delta_hat={delta:.10f} stderr={se:.10f} window={window[0]:g},{window[1]:g} R={R:g}", "R,count"]
    rows += [f"{r:.2f},{int(c)}" for r, c in zip(radii, counts)]
    _emit("\n".join(rows) + "\n", args.out, "delta.csv")
    return 0


def cmd_patterson(args):
    pres = _presentation(args.config)
    R = args.radius or 25.0
    orbit = enumerate_orbit(pres, np.zeros(pres.dim), R)
    delta, se = ms.critical_exponent_estimate(orbit, (R / 2, R))
    mu = ms.patterson_approx(orbit, delta + args.eps, delta_hat=delta, stderr=se)
    _emit(mu.table(), args.out, "patterson.csv")
    return 0


def _sample_points(pres, n, seed, length):
    rng = np.random.default_rng(seed)
    return [cl.myrberg_candidate(pres, rng, length=length, cover=1) for _ in range(n)]


def cmd_classify(args):
    pres = _presentation(args.config)
    T = args.T
    R = args.radius or 2 * T + 1
    orbit = enumerate_orbit(pres, np.zeros(pres.dim), R)
    M = args.depth if args.depth is not None else cl.DEFAULT_DEPTH
    kappa = args.kappa if args.kappa is not None else 0.0
    if args.points:
        pts = np.loadtxt(args.points, delimiter=",", ndmin=2)
        xs = [p / np.linalg.norm(p) for p in pts]
    else:
        xs = _sample_points(pres, args.n_points, args.seed, args.word_length)

    def run(xi):
        return cl.classify_point(orbit, xi, T, c=args.c, kappa=kappa, M=M)

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        verdicts = list(pool.map(run, xs))
    _emit(cl.verdicts_table(verdicts), args.out, "verdicts.csv")
    return 0


def cmd_probe(args):
    cfg = cf.load_experiment(args.config) if args.config else cf.load_experiment(args.kind.replace("-", "_"))
    if cfg.kind != args.kind:
        raise cf.ConfigError(f"experiment file is of kind {cfg.kind!r}, not {args.kind!r}")
    over = {"seed": args.seed, "out": args.out, "M": args.depth}
    if args.radius is not None:
        over["radii"] = [args.radius]
    if args.kappa is not None:
        over["kappas"] = [args.kappa]
    cfg = cfg.with_overrides(**over)
    report = PROBES[args.kind](cfg)
    out = args.out or cfg.out
    if out is None:
        sys.stdout.write(report.to_text())
    else:
        _emit(report.to_json(), out, f"{cfg.name}.json")
        _emit(report.to_text(), out, f"{cfg.name}.txt")
    return 0


def cmd_render(args):
    pres = _presentation(args.config)
    R = args.radius or 15.0
    orbit = enumerate_orbit(pres, np.zeros(pres.dim), R)
    params = {"presentation": pres.name, "R": R}
    measure = None
    if args.measure:
        try:
            delta, se = ms.critical_exponent_estimate(orbit, (max(1.0, R - max(5.0, R / 2)), R))
            params["delta_source"] = "fit"
        except InsufficientDataError:
            # small balls: fall back to the word-length oracle
            delta, se = ms.exponent_oracle(pres), 0.0
            params["delta_source"] = "oracle"
        measure = ms.patterson_approx(orbit, delta + args.eps, delta_hat=delta, stderr=se)
        params.update(s=round(delta + args.eps, 10))
    verdicts = []
    if args.verdicts:
        verdicts = _read_verdicts(args.verdicts)
    text = render.render_svg(orbit=orbit, measure=measure, verdicts=verdicts, params=params, title=pres.name)
    _emit(text, args.out, "render.svg")
    return 0


def _read_verdicts(path):
    lines = Path(path).read_text().splitlines()
    if not lines:
        return []
    keys = lines[0].split(",")
    out = []
    for line in lines[1:]:
        rec = dict(zip(keys, line.split(",")))
        rec["point"] = [float(v) for v in rec["point"].split()]
        for k in list(rec):
            if k.endswith("_passed"):
                rec[k] = rec[k] == "True"
        out.append(rec)
    return out


def _positive(kind):
    def parse(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v

    return parse


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="presentation or experiment file, or a shipped name")
    common.add_argument("--radius", type=_positive(float), help="truncation radius")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output directory (default: standard output)")
    common.add_argument("--kappa", type=float, default=None)
    common.add_argument("--depth", type=_positive(float), default=None, help="horospheric depth M")
    common.add_argument("--threads", type=_positive(int), default=1)

    p = argparse.ArgumentParser(prog="horolab", description="Limit sets of Schottky and free Kleinian groups.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("enumerate", parents=[common], help="orbit ball as a table")
    s.set_defaults(func=cmd_enumerate)
    s = sub.add_parser("delta", parents=[common], help="critical exponent estimate and counting series")
    s.add_argument("--window", type=float, nargs=2)
    s.set_defaults(func=cmd_delta)
    s = sub.add_parser("patterson", parents=[common], help="atomic Patterson measure")
    s.add_argument("--eps", type=_positive(float), default=0.1)
    s.set_defaults(func=cmd_patterson)
    s = sub.add_parser("classify", parents=[common], help="verdicts for sampled boundary points")
    s.add_argument("--points", help="CSV of boundary points (default: random coded points)")
    s.add_argument("--n-points", type=_positive(int), default=20)
    s.add_argument("--word-length", type=_positive(int), default=12)
    s.add_argument("--T", type=_positive(float), default=10.0)
    s.add_argument("--c", type=_positive(float), default=2.0)
    s.set_defaults(func=cmd_classify)
    s = sub.add_parser("probe", parents=[common], help="run an experiment probe")
    s.add_argument("kind", choices=sorted(PROBES))
    s.set_defaults(func=cmd_probe)
    s = sub.add_parser("render", parents=[common], help="SVG of an orbit, measure and verdicts")
    s.add_argument("--measure", action="store_true")
    s.add_argument("--eps", type=_positive(float), default=0.1)
    s.add_argument("--verdicts", help="verdict CSV from the classify subcommand")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.kappa is not None and not 0 <= args.kappa <= 1:
        print("horolab: error: --kappa must lie in [0, 1]", file=sys.stderr)
        return EXIT_CONFIG
    if args.command != "probe" and args.config is None:
        print("horolab: error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is None and args.command != "probe":
        args.seed = 0
    try:
        return args.func(args)
    except cf.ConfigError as err:
        print(f"horolab: invalid configuration: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as err:
        print(f"horolab: resource cap reached: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    except HorolabError as err:
        print(f"horolab: precondition failed: {err}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
