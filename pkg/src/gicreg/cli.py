"""Command-line interface: ``gicreg {region,compare,corner,oracle,freq-response}``.

Exit codes: 0 success (or dominance), 1 checked failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .frontier import Frontier, convex_hull, corner_query, dominates, max_violation, read_csv
from .kernels import BACKEND
from .model import ChannelParams, channel_from_mapping, read_config
from .optimizer import (
    OPEN_STEP,
    UNIT_STEP,
    GridSpec,
    SearchBudget,
    expand_names,
    grid_search,
    parse_range,
    random_refine_search,
)
from .quadrature import QuadratureConfig
from .schemes import DERIVATION, PRINTED, SCHEMES, get_scheme
from .spectra import make_arma, pole_radius, write_frequency_response
from .toeplitz_oracle import TERMS, convergence_report, converged, format_table, reports_to_json

__all__ = ["main", "RunManifest", "build_parser"]

MAX_GRID = 50_000_000
DEFAULT_BUDGET = 100_000
CHANNEL_KEYS = ("p1", "p2", "a12", "a21")
REGION_KEYS = {
    "scheme", "search", "step", "filter_step", "seed", "budget", "rounds", "threads",
    "variant", "quad_method", "quad_points", "quad_tol", "hull",
}  # fmt: skip


class UsageError(Exception):
    """Bad flags, config or input files (exit code 2)."""


@dataclass
class RunManifest:
    """Provenance of a ``region`` run."""

    command: str
    argv: list[str]
    channel: dict
    scheme: str
    search: str
    grid: dict | None
    budget: dict | None
    seed: int | None
    variant: str
    quadrature: dict
    threads: int
    backend: str
    tool_version: str
    wall_clock_seconds: float
    frontier_points: int
    outputs: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# helpers


def _kv(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def _float_list(text: str | None) -> tuple[float, ...]:
    if text is None or text.strip() == "":
        return ()
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad coefficient list {text!r}") from None


def _default_threads() -> int:
    env = os.environ.get("GICREG_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise UsageError(f"GICREG_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError("GICREG_THREADS must be >= 1")
    return n


def _load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        return read_config(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _channel(args, cfg: dict[str, str]) -> ChannelParams:
    vals: dict[str, object] = {k: cfg.get(k) for k in CHANNEL_KEYS}
    for k in CHANNEL_KEYS:
        v = getattr(args, k)
        if v is not None:
            vals[k] = v
    try:
        return channel_from_mapping(vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _pick(args, cfg, name, conv, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    if name in cfg:
        try:
            return conv(cfg[name])
        except ValueError:
            raise UsageError(f"config key {name}: bad value {cfg[name]!r}") from None
    return default


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _write_all(files: dict[str, str]) -> None:
    """Write every file or none: stage to temporaries, then rename."""
    staged: list[str] = []
    done: list[str] = []
    try:
        for path, text in files.items():
            d = os.path.dirname(os.path.abspath(path))
            if not os.path.isdir(d):
                raise UsageError(f"output directory {d} does not exist")
            tmp = path + ".part"
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append(tmp)
        for path in files:
            os.replace(path + ".part", path)
            done.append(path)
    except BaseException:
        for p in staged + done:
            try:
                os.remove(p)
            except OSError:
                pass
        raise


# ---------------------------------------------------------------------------
# region


def _region_grid(sd, args, cfg, unit_step, open_step) -> GridSpec:
    ranges: dict[str, np.ndarray] = {}
    fixed: dict[str, float] = {}
    for key, val in cfg.items():
        if key.startswith("grid."):
            name = key[5:]
            vals = parse_range(val)
            if vals.size == 1 and ":" not in val:
                fixed[name] = float(vals[0])
            else:
                ranges[name] = vals
    for name, val in args.range or []:
        ranges[name] = parse_range(val)
        fixed.pop(name, None)
    for name, val in args.fix or []:
        fixed[name] = float(val)
        ranges.pop(name, None)
    return GridSpec.default(sd.name, unit_step, open_step, fixed=fixed, ranges=ranges)


def _fixed_map(args, cfg) -> dict[str, float]:
    fixed: dict[str, float] = {}
    for key, val in cfg.items():
        if key.startswith("grid.") and ":" not in val:
            fixed[key[5:]] = float(val)
    for name, val in args.fix or []:
        fixed[name] = float(val)
    return fixed


def cmd_region(args) -> int:
    cfg = _load_config(args.config)
    unknown = [k for k in cfg if k not in CHANNEL_KEYS and k not in REGION_KEYS and not k.startswith("grid.")]
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    ch = _channel(args, cfg)
    scheme = _pick(args, cfg, "scheme", str, None)
    if scheme is None:
        raise UsageError("--scheme is required")
    if scheme not in SCHEMES:
        raise UsageError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    sd = get_scheme(scheme)
    search = _pick(args, cfg, "search", str, sd.default_search)
    if search not in ("grid", "random"):
        raise UsageError("search must be 'grid' or 'random'")
    threads = _pick(args, cfg, "threads", int, None)
    if threads is None:
        threads = _default_threads()
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    variant = _pick(args, cfg, "variant", str, DERIVATION)
    if variant not in (DERIVATION, PRINTED):
        raise UsageError(f"variant must be {DERIVATION} or {PRINTED}")
    try:
        qcfg = QuadratureConfig(
            method=_pick(args, cfg, "quad_method", str, "fixed-trapezoid"),
            points=_pick(args, cfg, "quad_points", int, 4096),
            tol=_pick(args, cfg, "quad_tol", float, 1e-10),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    hull = bool(args.hull) or _pick(argparse.Namespace(), cfg, "hull", _bool, False)
    seed = _pick(args, cfg, "seed", int, 0)

    t0 = time.perf_counter()
    grid_info = budget_info = None
    try:
        if search == "grid":
            grid = _region_grid(
                sd,
                args,
                cfg,
                _pick(args, cfg, "step", float, UNIT_STEP),
                _pick(args, cfg, "filter_step", float, OPEN_STEP),
            )
            if grid.size > args.max_grid:
                raise UsageError(
                    f"grid has {grid.size} points (limit {args.max_grid}); "
                    "coarsen with --step/--filter-step, collapse dimensions with --fix, "
                    "or use --search random"
                )
            front = grid_search(ch, scheme, grid, qcfg, threads, variant)
            grid_info = grid.as_dict()
            grid_info["points"] = grid.size
            seed = None
        else:
            budget = SearchBudget(
                _pick(args, cfg, "budget", int, DEFAULT_BUDGET), seed, _pick(args, cfg, "rounds", int, 3)
            )
            fixed = _fixed_map(args, cfg)
            anchor = {k: float(v) for k, v in (args.anchor or [])}
            front = random_refine_search(
                ch, scheme, budget, anchor or None, qcfg, threads, fixed or None, variant
            )
            budget_info = {
                "max_evaluations": budget.max_evaluations,
                "refinement_rounds": budget.refinement_rounds,
                "fixed": dict(sorted(expand_names(sd, fixed).items())),
                "anchor": dict(sorted(expand_names(sd, anchor).items())),
            }
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if len(front) == 0:
        print("error: the search produced no rate points", file=sys.stderr)
        return 1
    if hull:
        front = convex_hull(front)
    wall = time.perf_counter() - t0

    prefix = args.out
    csv_text = front.to_csv()
    json_text = front.to_json()
    outputs = {prefix + ".csv": csv_text, prefix + ".json": json_text}
    manifest = RunManifest(
        command="region",
        argv=list(args.argv),
        channel=ch.as_dict(),
        scheme=scheme,
        search=search,
        grid=grid_info,
        budget=budget_info,
        seed=seed,
        variant=variant,
        quadrature=asdict(qcfg),
        threads=threads,
        backend=BACKEND,
        tool_version=__version__,
        wall_clock_seconds=round(wall, 3),
        frontier_points=len(front),
        outputs={os.path.basename(p): _sha256(t) for p, t in outputs.items()},
    )
    outputs[prefix + ".manifest.json"] = manifest.to_json()
    _write_all(outputs)
    print(f"{scheme}: {len(front)} frontier points -> {prefix}.csv ({wall:.2f} s)")
    return 0


# ---------------------------------------------------------------------------
# compare / corner


def _read_frontier(path: str) -> Frontier:
    try:
        return read_csv(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_compare(args) -> int:
    if args.slack < 0:
        raise UsageError("--slack must be nonnegative")
    base = _read_frontier(args.base)
    other = _read_frontier(args.other)
    ok = dominates(other, base, args.slack)
    viol = max_violation(other, base)
    print(f"dominates: {'yes' if ok else 'no'}")
    print(f"max violation: {viol:.12g}")
    return 0 if ok else 1


def cmd_corner(args) -> int:
    fr = _read_frontier(args.input)
    if args.hull:
        fr = convex_hull(fr)
    print(f"{corner_query(fr, args.r2_min):.12g}")
    return 0


# ---------------------------------------------------------------------------
# oracle / freq-response


def _spectrum(ar_text, ma_text, power):
    ar, ma = _float_list(ar_text), _float_list(ma_text)
    if pole_radius(ar) >= 1.0:
        raise UsageError(f"unstable AR coefficients {ar}")
    try:
        return make_arma(ar, ma, power)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_oracle(args) -> int:
    cfg = _load_config(args.config)
    ch = _channel(args, cfg)
    s1 = _spectrum(args.ar1, args.ma1, ch.p1)
    s2 = _spectrum(args.ar2, args.ma2, ch.p2)
    terms = TERMS if args.term == "all" else (args.term,)
    try:
        reports = convergence_report(ch, (s1, s2), terms, args.n_list)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(format_table(reports))
    if args.json:
        _write_all({args.json: reports_to_json(reports)})
    if not converged(reports):
        print("not converged: error at the largest n exceeds the error at the smallest n", file=sys.stderr)
        return 1
    return 0


def cmd_freq_response(args) -> int:
    s = _spectrum(args.ar, args.ma, 1.0)
    if args.points < 1:
        raise UsageError("--points must be positive")
    tmp = args.out + ".part"
    try:
        write_frequency_response(tmp, s, args.points)
        os.replace(tmp, args.out)
    except OSError as exc:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    print(f"wrote {args.points} points to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_channel(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file (p1, p2, a12, a21, grid.<name>, ...)")
    for k in CHANNEL_KEYS:
        p.add_argument(f"--{k}", type=float, help=f"channel {k} (overrides the config file)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gicreg", description="Achievable rate regions of the two-user Gaussian interference channel.")
    ap.add_argument("--version", action="version", version=f"gicreg {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("region", help="compute a rate-region frontier")
    _add_channel(r)
    r.add_argument("--scheme", choices=sorted(SCHEMES))
    r.add_argument("--search", choices=("grid", "random"), help="default depends on the scheme")
    r.add_argument("--step", type=float, help=f"grid step of [0,1] parameters (default {UNIT_STEP})")
    r.add_argument("--filter-step", dest="filter_step", type=float, help=f"grid step of filter coefficients (default {OPEN_STEP})")
    r.add_argument("--fix", type=_kv, action="append", metavar="NAME=VALUE", help="fix a parameter or a name prefix (rho, kappa)")
    r.add_argument("--range", type=_kv, action="append", metavar="NAME=LO:HI:STEP", help="explicit grid for a parameter")
    r.add_argument("--anchor", type=_kv, action="append", metavar="NAME=VALUE", help="random search: box centre for a parameter")
    r.add_argument("--budget", type=int, help=f"random search evaluations (default {DEFAULT_BUDGET})")
    r.add_argument("--seed", type=int, help="random search seed (default 0)")
    r.add_argument("--rounds", type=int, help="random search refinement rounds (default 3)")
    r.add_argument("--variant", choices=(DERIVATION, PRINTED), help="rate-splitting bound weighting")
    r.add_argument("--quad-method", dest="quad_method", choices=("fixed-trapezoid", "adaptive"))
    r.add_argument("--quad-points", dest="quad_points", type=int)
    r.add_argument("--quad-tol", dest="quad_tol", type=float)
    r.add_argument("--threads", type=int, help="worker threads (default $GICREG_THREADS or 1)")
    r.add_argument("--hull", action="store_true", help="write the time-sharing closure instead of the raw frontier")
    r.add_argument("--max-grid", dest="max_grid", type=int, default=MAX_GRID, help=argparse.SUPPRESS)
    r.add_argument("--out", required=True, help="output prefix for .csv, .json and .manifest.json")
    r.set_defaults(func=cmd_region)

    c = sub.add_parser("compare", help="check whether one frontier dominates another")
    c.add_argument("--base", required=True)
    c.add_argument("--other", required=True)
    c.add_argument("--slack", type=float, default=0.0)
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("corner", help="largest R1 with R2 >= r2-min")
    k.add_argument("--in", dest="input", required=True)
    k.add_argument("--r2-min", dest="r2_min", type=float, required=True)
    k.add_argument("--hull", action="store_true", help="query the time-sharing closure")
    k.set_defaults(func=cmd_corner)

    o = sub.add_parser("oracle", help="finite-blocklength log-det rates against their spectral limits")
    _add_channel(o)
    o.add_argument("--ar1", help="comma-separated AR coefficients of user 1")
    o.add_argument("--ma1", help="comma-separated MA coefficients of user 1")
    o.add_argument("--ar2")
    o.add_argument("--ma2")
    o.add_argument("--term", choices=TERMS + ("all",), default="all")
    o.add_argument("--n-list", dest="n_list", type=int, nargs="+", default=[128, 512, 2048])
    o.add_argument("--json", help="write the reports as JSON")
    o.set_defaults(func=cmd_oracle)

    f = sub.add_parser("freq-response", help="export a filter's frequency-response modulus")
    f.add_argument("--ar")
    f.add_argument("--ma")
    f.add_argument("--points", type=int, default=512)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_freq_response)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return int(args.func(args))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
