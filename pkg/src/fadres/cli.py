"""Command-line front end.

Subcommands ``xi``, ``surface``, ``bigxi``, ``resonances``, ``pole`` and
``convert`` write a table as CSV (default) or JSON to ``--out`` or stdout.
Values come from built-in defaults, then an optional JSON ``--config`` file
whose keys mirror the flag names, then the command line.

Exit codes: 0 success (including empty tables), 2 invalid arguments or
config, 3 numerical failure or singularity at a requested point.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .enhancement import Variant, big_xi, classify, xi
from .errors import InputError, NumericalError
from .numerics import QuadratureSpec, RootFindSpec
from .scanner import (
    ScanGrid,
    default_workers,
    find_resonance_regions,
    find_resonances,
    scan_arrays,
)
from .twobody import PoleKind, find_pair_pole
from .units import PhysicalScale, pretty_length, rho_to_distance, t0_to_momentum

log = logging.getLogger("fadres")

DEFAULTS = {
    "lambda": -0.95,
    "variant": "summed",
    "t0": None,
    "t0_range": None,
    "rho": None,
    "rho_range": None,
    "interval": "0.001:0.6",
    "format": "csv",
    "out": None,
    "tol": None,
    "beta": None,
    "integral": False,
    "regions": False,
    "percentile": 2.0,
    "timing": False,
}

DEFAULT_RANGES = {
    "surface": {"t0_range": "0.001:0.6:300", "rho_range": "1:30:600"},
    "bigxi": {"rho_range": "1.5:5:36"},
    "resonances": {"t0": 0.12, "rho_range": "1:6"},
}


@dataclass
class ResultSet:
    command: str
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    wall_time: float = 0.0
    float_format: str | None = None  # None: shortest round-trip repr


def _fmt(value, float_format=None):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return float_format % value if float_format else repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def metadata(result: ResultSet, timing: bool = False) -> dict:
    # wall time is opt-in so repeated runs stay byte-identical
    meta = {"tool": "fadres", "version": __version__, "command": result.command, **result.metadata}
    if timing:
        meta["wall_time_s"] = result.wall_time
    return meta


def render(result: ResultSet, fmt: str, timing: bool = False) -> str:
    meta = metadata(result, timing)
    if fmt == "json":
        doc = {
            "metadata": meta,
            "columns": result.columns,
            "rows": [[_json_value(v) for v in row] for row in result.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_fmt(v, result.float_format) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- parsing


def _parse_range(text, with_count=True):
    parts = str(text).split(":")
    try:
        if with_count:
            if len(parts) == 2:
                return float(parts[0]), float(parts[1]), None
            if len(parts) == 3:
                return float(parts[0]), float(parts[1]), int(parts[2])
        elif len(parts) == 2:
            return float(parts[0]), float(parts[1])
    except ValueError:
        pass
    raise InputError(f"malformed range {text!r}")


def _range(cfg, key, need_count=True):
    if cfg.get(key) is None:
        raise InputError(f"--{key.replace('_', '-')} is required")
    a, b, n = _parse_range(cfg[key])
    if not a < b:
        raise InputError(f"{key} must be ordered (a < b)")
    if need_count and (n is None or n < 2):
        raise InputError(f"{key} needs a count >= 2 (a:b:n)")
    return a, b, n


def _values(cfg, key):
    """A single value or the points of a range flag."""
    import numpy as np

    if cfg.get(f"{key}_range") is not None:
        a, b, n = _range(cfg, f"{key}_range")
        return [float(v) for v in np.linspace(a, b, n)]
    if cfg.get(key) is not None:
        return [float(cfg[key])]
    raise InputError(f"--{key} or --{key}-range is required")


def _quad_spec(cfg, default: QuadratureSpec) -> QuadratureSpec:
    if cfg.get("tol") is None:
        return default
    tol = float(cfg["tol"])
    return QuadratureSpec(abs_tol=tol, rel_tol=tol, max_subdivisions=default.max_subdivisions)


def _root_spec(cfg) -> RootFindSpec:
    return RootFindSpec(tol=float(cfg["tol"])) if cfg.get("tol") is not None else RootFindSpec(tol=1e-10)


def _config_echo(cfg, keys):
    return {k: cfg[k] for k in keys if cfg.get(k) is not None}


# --------------------------------------------------------------- commands


def cmd_xi(cfg) -> ResultSet:
    lam = float(cfg["lambda"])
    t0 = float(_values(cfg, "t0")[0]) if cfg.get("t0_range") is None else None
    rho = float(_values(cfg, "rho")[0]) if cfg.get("rho_range") is None else None
    if t0 is None or rho is None:
        raise InputError("xi evaluates a single point; use --t0 and --rho")
    factor = xi(lam, t0, rho, cfg["variant"])
    v = factor.value
    row = [lam, t0, rho, 2.0 * rho, v.real, v.imag, abs(v), classify(factor).value]
    return ResultSet("xi", ["lambda", "t0", "rho", "d", "re_xi", "im_xi", "abs_xi", "regime"],
                     [row], {"config": _config_echo(cfg, ["lambda", "variant", "t0", "rho"]),
                             "note": "rho is the half separation; d = 2 rho"})


def _surface_grid(cfg) -> ScanGrid:
    ta, tb, nt = _range(cfg, "t0_range")
    ra, rb, nr = _range(cfg, "rho_range")
    return ScanGrid(float(cfg["lambda"]), (ta, tb), nt, (ra, rb), nr, cfg["variant"])


def cmd_surface(cfg) -> ResultSet:
    grid = _surface_grid(cfg)
    s = scan_arrays(grid)
    echo = _config_echo(cfg, ["lambda", "variant", "t0_range", "rho_range"])
    if cfg.get("regions"):
        echo["percentile"] = cfg["percentile"]
        regions = find_resonance_regions(grid, percentile=float(cfg["percentile"]), surface=s)
        rows = [[r.t0_window[0], r.t0_window[1], r.rho_window[0], r.rho_window[1],
                 r.max_abs_xi, r.peak_t0, r.peak_rho] for r in regions]
        cols = ["t0_min", "t0_max", "rho_min", "rho_max", "max_abs_xi", "peak_t0", "peak_rho"]
        return ResultSet("surface", cols, rows, {"config": echo})
    rows = []
    for t, r, x, d, f in zip(s.t0.ravel().tolist(), s.rho.ravel().tolist(), s.xi.ravel().tolist(),
                             s.denom_abs.ravel().tolist(), s.singular.ravel().tolist()):
        rows.append([t, r, x.real, x.imag, abs(x), d, bool(f)])
    cols = ["t0", "rho", "re_xi", "im_xi", "abs_xi", "denom_abs", "singular_flag"]
    return ResultSet("surface", cols, rows, {"config": echo, "singular_count": int(s.singular.sum())},
                     float_format="%.17g")


def cmd_bigxi(cfg) -> ResultSet:
    lam = float(cfg["lambda"])
    interval = _parse_range(cfg["interval"], with_count=False)
    rhos = _values(cfg, "rho")
    spec = _quad_spec(cfg, QuadratureSpec(abs_tol=1e-10, rel_tol=1e-8, max_subdivisions=20000))
    normalize = not cfg.get("integral")

    def one(rho):
        return big_xi(lam, rho, interval, spec, cfg["variant"], normalize=normalize)

    with ThreadPoolExecutor(max_workers=default_workers()) as pool:
        results = list(pool.map(one, rhos))
    rows = [[rho, r.value.real, r.value.imag, abs(r.value)] for rho, r in zip(rhos, results)]
    excluded = {repr(rho): r.excluded_t0 for rho, r in zip(rhos, results) if r.excluded_t0}
    echo = _config_echo(cfg, ["lambda", "variant", "rho", "rho_range", "interval", "tol", "integral"])
    return ResultSet("bigxi", ["rho", "re_Xi", "im_Xi", "abs_Xi"], rows,
                     {"config": echo, "mode": "mean" if normalize else "integral",
                      "excluded_t0": excluded})


def cmd_resonances(cfg) -> ResultSet:
    lam = float(cfg["lambda"])
    a, b, n = _range(cfg, "rho_range", need_count=False)
    step = 0.01 if n is None else min(0.01, (b - a) / (n - 1))
    t0s = _values(cfg, "t0")
    meta = {"config": _config_echo(cfg, ["lambda", "variant", "t0", "t0_range", "rho_range", "tol"])}
    if lam < -1:
        pole = find_pair_pole(lam)
        if pole.kind is PoleKind.BOUND:
            msg = (f"lambda={lam} binds the dark-heavy pair: bound-state pole at "
                   f"t0 = {pole.location.imag:.10g}i; listing continuum resonances anyway")
            log.warning(msg)
            meta["warning"] = msg
    rows = []
    for t0 in t0s:
        for rec in find_resonances(lam, t0, (a, b), cfg["variant"], _root_spec(cfg), step=step):
            rows.append([rec.lambda_dh, rec.t0, rec.rho_star, rec.peak_abs_xi, rec.fwhm_rho, rec.residual])
    cols = ["lambda", "t0", "rho_star", "peak_abs_xi", "fwhm_rho", "residual"]
    return ResultSet("resonances", cols, rows, meta)


def cmd_pole(cfg) -> ResultSet:
    lam = float(cfg["lambda"])
    pole = find_pair_pole(lam, _root_spec(cfg))
    z = pole.location
    row = [lam, z.real + 0.0, z.imag + 0.0, pole.kind.value]
    return ResultSet("pole", ["lambda", "re_t0", "im_t0", "kind"], [row],
                     {"config": _config_echo(cfg, ["lambda", "tol"]),
                      "linear_tau": pole.linear_tau})


def cmd_convert(cfg) -> ResultSet:
    if cfg.get("beta") is None:
        raise InputError("convert needs --beta (1/cm)")
    scale = PhysicalScale(float(cfg["beta"]))
    rows = []
    if cfg.get("rho") is not None:
        rho = float(cfg["rho"])
        dist = rho_to_distance(rho, scale)
        rows.append(["r", rho, scale.beta, dist.r_cm, "cm", pretty_length(dist.r_cm)])
        rows.append(["d", rho, scale.beta, dist.d_cm, "cm", pretty_length(dist.d_cm)])
    if cfg.get("t0") is not None:
        t0 = float(cfg["t0"])
        rows.append(["p0", t0, scale.beta, t0_to_momentum(t0, scale), "1/cm", ""])
    if not rows:
        raise InputError("convert needs --rho and/or --t0")
    return ResultSet("convert", ["quantity", "input", "beta", "value", "unit", "pretty"], rows,
                     {"config": _config_echo(cfg, ["rho", "t0", "beta"])})


COMMANDS = {
    "xi": cmd_xi,
    "surface": cmd_surface,
    "bigxi": cmd_bigxi,
    "resonances": cmd_resonances,
    "pole": cmd_pole,
    "convert": cmd_convert,
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    shared.add_argument("--lambda", dest="lambda", type=float, help="dark-heavy coupling")
    shared.add_argument("--variant", choices=["summed", "diagonal", "offdiag", "off_diagonal"])
    shared.add_argument("--t0", type=float)
    shared.add_argument("--t0-range", dest="t0_range", metavar="A:B:N")
    shared.add_argument("--rho", type=float, help="dimensionless half separation")
    shared.add_argument("--rho-range", dest="rho_range", metavar="A:B:N")
    shared.add_argument("--interval", metavar="A:B", help="t0 interval for bigxi")
    shared.add_argument("--format", choices=["csv", "json"])
    shared.add_argument("--out", help="output path (default: stdout)")
    shared.add_argument("--config", help="JSON file with flag values")
    shared.add_argument("--tol", type=float)
    shared.add_argument("--timing", action="store_true", default=argparse.SUPPRESS,
                        help="record wall time in metadata")

    parser = argparse.ArgumentParser(
        prog="fadres",
        description="Resonant enhancement of the heavy-heavy interaction by a light third particle.")
    parser.add_argument("--version", action="version", version=f"fadres {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("xi", parents=[shared], help="enhancement factor at one (t0, rho)")
    p = sub.add_parser("surface", parents=[shared], help="xi over a (t0, rho) grid")
    p.add_argument("--regions", action="store_true", default=argparse.SUPPRESS,
                   help="report resonance regions instead of samples")
    p.add_argument("--percentile", type=float, default=argparse.SUPPRESS,
                   help="denominator percentile defining a region (default 2)")
    p = sub.add_parser("bigxi", parents=[shared], help="t0-averaged enhancement vs rho")
    p.add_argument("--integral", action="store_true", default=argparse.SUPPRESS,
                   help="report the integral instead of the mean")
    sub.add_parser("resonances", parents=[shared], help="resonance distances at fixed t0")
    sub.add_parser("pole", parents=[shared], help="two-body pole location and kind")
    p = sub.add_parser("convert", parents=[shared], help="dimensionless to CGS units")
    p.add_argument("--beta", type=float, default=argparse.SUPPRESS, help="potential parameter in 1/cm")
    return parser


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    cfg = {}
    for key, value in data.items():
        norm = key.lstrip("-").replace("-", "_")
        if norm not in DEFAULTS:
            raise InputError(f"unknown config key {key!r}")
        cfg[norm] = value
    return cfg


def effective_config(command: str, cli: dict) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(DEFAULT_RANGES.get(command, {}))
    if cli.get("config"):
        file_cfg = load_config(cli["config"])
        # an explicit single value overrides a default range and vice versa
        _merge(cfg, file_cfg)
    _merge(cfg, {k: v for k, v in cli.items() if k not in ("config", "command")})
    cfg["variant"] = Variant.parse(cfg["variant"]).value
    if cfg["format"] not in ("csv", "json"):
        raise InputError("format must be csv or json")
    return cfg


def _merge(cfg, new):
    for key, value in new.items():
        cfg[key] = value
        for a, b in (("t0", "t0_range"), ("rho", "rho_range")):
            if key == a:
                cfg[b] = None
            elif key == b:
                cfg[a] = None


def write_output(result: ResultSet, cfg) -> None:
    text = render(result, cfg["format"], cfg.get("timing", False))
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.write_text(text, encoding="utf-8", newline="\n")
        if cfg["format"] == "csv":
            meta = metadata(result, cfg.get("timing", False))
            meta_path = out.with_name(out.name + ".meta.json")
            meta_path.write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    cli = vars(args)
    command = cli.pop("command")
    try:
        cfg = effective_config(command, cli)
        start = time.perf_counter()
        result = COMMANDS[command](cfg)
        result.wall_time = time.perf_counter() - start
        write_output(result, cfg)
    except InputError as exc:
        print(f"fadres {command}: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError) as exc:
        print(f"fadres {command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
