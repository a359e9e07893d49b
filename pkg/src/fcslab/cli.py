"""Command line front end: ``fcslab {verify,fcs,charfun,scan,limits} CONFIG``.

Exit codes: 0 success, 1 failed verification, 2 bad configuration,
3 resource cap exceeded.
"""

import argparse
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .config import ConfigError, ExperimentConfig
from .errors import ResourceError
from .fcs import (
    MODULAR_DIM_CAP,
    calF,
    char_function,
    fcs_reservoir_direct,
    fcs_reservoir_modular,
    fcs_system,
)
from .verify import report_csv, run_suite

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


def cache_root():
    env = os.environ.get("FCSLAB_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "fcslab"


def _write_atomic(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


class Outputs:
    """Collects emitted files, then writes them to the output directory and the cache."""

    def __init__(self):
        self.files = {}
        self.code = EXIT_OK

    def add(self, name, text):
        self.files[name] = text

    def flush(self, out_dir):
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.files):
            _write_atomic(out_dir / name, self.files[name])


def _cache_key(cfg, command, extra):
    return f"{cfg.content_hash()}-{command}" + "".join(f"-{k}{v!r}" for k, v in sorted(extra.items()))


def _cache_load(key):
    entry = cache_root() / key
    manifest = entry / "manifest.json"
    if not manifest.is_file():
        return None
    meta = json.loads(manifest.read_text())
    out = Outputs()
    out.code = meta["code"]
    for name in meta["files"]:
        out.add(name, (entry / name).read_text())
    return out


def _cache_store(key, outputs):
    root = cache_root()
    root.mkdir(parents=True, exist_ok=True)
    final = root / key
    if final.exists():
        return
    staging = Path(tempfile.mkdtemp(dir=root, prefix=".stage-"))
    try:
        for name, text in outputs.files.items():
            (staging / name).write_text(text)
        meta = {"code": outputs.code, "files": sorted(outputs.files)}
        (staging / "manifest.json").write_text(json.dumps(meta))
        os.replace(staging, final)  # first writer wins; later ones are discarded
    except OSError:
        pass
    finally:
        shutil.rmtree(staging, ignore_errors=True)


# -- commands ----------------------------------------------------------------------


def cmd_verify(cfg, args, out):
    m = cfg.build()
    results = run_suite(m, times=cfg.time_grid, seed=cfg.seed, gammas=cfg.gammas)
    out.add("verify_report.csv", report_csv(results))
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAIL {r.name}: residual {r.residual:.3e} > {r.tolerance:.1e}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    out.code = EXIT_FAILED if failed else EXIT_OK


def cmd_fcs(cfg, args, out):
    m = cfg.build()
    out.add("p_system.csv", fcs_system(m, args.t).to_csv())
    out.add("p_reservoir_direct.csv", fcs_reservoir_direct(m, args.t).to_csv())
    if m.dim <= MODULAR_DIM_CAP:
        out.add("p_reservoir_modular.csv", fcs_reservoir_modular(m, args.t).to_csv())
    else:
        print(f"skipping p_reservoir_modular.csv: d = {m.dim} > {MODULAR_DIM_CAP}", file=sys.stderr)


def cmd_charfun(cfg, args, out):
    m = cfg.build()
    gammas = asy.GAMMA_WINDOW if cfg.gammas is None else np.asarray(cfg.gammas)
    direct = char_function(fcs_reservoir_direct(m, args.t), gammas)
    ref = char_function(asy.double_limit_fcs(m), gammas)
    lines = ["gamma,calF_re,calF_im,direct_re,direct_im,reference_re,reference_im"]
    for g, d, r in zip(gammas, direct, ref):
        f = calF(m, args.t, 1j * g / m.beta)
        vals = (g, f.real, f.imag, d.real, d.imag, r.real, r.imag)
        lines.append(",".join(f"{v:.17g}" for v in vals))
    out.add("charfun.csv", "\n".join(lines) + "\n")


def scan_config(cfg):
    """Run every axis listed in the configuration and concatenate the rows."""
    rows = []
    for entry in cfg.scan:
        axis, workers = entry["axis"], entry.get("workers", 1)
        if axis == "lambda":
            values = entry.get("values", cfg.lambdas)
            family = [cfg.build(lam=v) for v in values]
            res = asy.scan(family, "lambda", values, limit=entry["limit"], workers=workers)
        elif axis == "size":
            lam = entry.get("lambda", min(cfg.lambdas))
            values = entry["values"]
            family = [cfg.build(lam=lam, reservoir_overrides={entry["param"]: int(v)}) for v in values]
            res = asy.scan(family, "size", values, limit=entry["limit"], workers=workers)
        else:
            times = entry.get("values", cfg.time_grid)
            res = asy.scan([cfg.build()], "time", times=times, workers=workers)
        rows.extend(res.rows)
    return asy.ScanResult(rows)


def cmd_scan(cfg, args, out):
    if not cfg.scan:
        raise ConfigError("no scan axes configured", "scan")
    result = scan_config(cfg)
    out.add("scan.csv", result.to_csv(timing=not args.no_timing))
    for r in result.errors:
        print(f"error at {r.axis}={r.value:g}: {r.error}", file=sys.stderr)
    out.code = EXIT_RESOURCE if result.errors else EXIT_OK


def cmd_limits(cfg, args, out):
    m = cfg.build()
    for which in ("reservoir", "system"):
        out.add(f"limit_cesaro_{which}.csv", asy.cesaro_fcs(m, which).to_csv())
        out.add(f"limit_idealized_{which}.csv", asy.fcs_limit_idealized(m, which).to_csv())
    out.add("limit_double.csv", asy.double_limit_fcs(m).to_csv())
    lines = ["mode,kolmogorov_to_P_S,cf_sup_to_P_S,kolmogorov_between_modes"]
    for rep in asy.limit_reports(m):
        d = rep.distances
        lines.append(
            f"{rep.mode},{d['kolmogorov_to_P_S']:.17g},{d['cf_sup_to_P_S']:.17g},"
            f"{d['kolmogorov_between_modes']:.17g}"
        )
    out.add("limits_summary.csv", "\n".join(lines) + "\n")


COMMANDS = {
    "verify": cmd_verify,
    "fcs": cmd_fcs,
    "charfun": cmd_charfun,
    "scan": cmd_scan,
    "limits": cmd_limits,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fcslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON experiment configuration")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--no-cache", action="store_true", help="ignore and do not fill the results cache")
        if name in ("fcs", "charfun"):
            p.add_argument("--t", type=float, required=True, help="measurement time")
        if name == "scan":
            p.add_argument("--no-timing", action="store_true", help="write 0 in the seconds column")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
    except FileNotFoundError:
        print(f"error: no such config file {args.config}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out if args.out else cfg.output_dir)
    extra = {k: getattr(args, k) for k in ("t", "no_timing") if hasattr(args, k)}
    key = _cache_key(cfg, args.command, extra)
    cached = None if args.no_cache else _cache_load(key)
    if cached is not None:
        cached.flush(out_dir)
        return cached.code
    out = Outputs()
    try:
        COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        out.flush(out_dir)
        return EXIT_RESOURCE
    out.flush(out_dir)
    if not args.no_cache and out.code != EXIT_RESOURCE:
        _cache_store(key, out)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
