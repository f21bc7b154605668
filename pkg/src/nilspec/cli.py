"""Command-line entry point: ``nilspec spectrum | verify | report``.

Exit status is 0 iff every pass/fail check of the invocation passed, 1 if
a check failed and 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as nio
from .config import coerce, load_config, merged, parse_observable, parse_system, parse_thresholds
from .correlation import corr_birkhoff, corr_exact, corr_quadrature, validate_psd, PSD_MAX_NMAX
from .errors import NilspecError, NoClosedFormError
from .scenarios import emit_outputs, run_suite, scenario_names
from .spectral import Thresholds, classify

ENGINES = ("auto", "exact", "quadrature", "birkhoff")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--threshold-file", help="key = value overrides for thresholds and tolerances")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nilspec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="correlation sequence and spectral summary of one observable")
    _common(sp)
    sp.add_argument("--system", help="rotation | weyl | heisenberg | skew | joining | product:a+b")
    sp.add_argument("--alpha", help="rotation number(s), comma separated")
    sp.add_argument("--beta", help="second translation parameter (heisenberg)")
    sp.add_argument("--cocycle", help="skew cocycle: const,k:coef,...")
    sp.add_argument("--observable", help="char:n=..,m=.. | zak:m=.. | poly:... | f*g")
    sp.add_argument("--engine", choices=ENGINES)
    sp.add_argument("--nmax", type=int)
    sp.add_argument("--resolution", type=int)
    sp.add_argument("--orbit-len", type=int, dest="orbit_len")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--stem", default="spectrum", help="file name stem of the outputs")

    vp = sub.add_parser("verify", help="run builtin scenarios")
    _common(vp)
    vp.add_argument("scenarios", nargs="*", help=f"subset of: {', '.join(scenario_names())}")
    vp.add_argument("--parallel", action="store_true", help="run scenarios in worker processes")
    vp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a scenario parameter (repeatable)")
    for flag in ("alpha", "beta", "engine", "nmax", "resolution", "orbit-len", "seed"):
        vp.add_argument(f"--{flag}", dest=flag.replace("-", "_"))

    rp = sub.add_parser("report", help="re-render outputs from saved correlation CSV files")
    _common(rp)
    rp.add_argument("inputs", nargs="+", help="*.corr.csv files or directories containing them")
    return ap


def _thresholds_from(args) -> dict:
    if not args.threshold_file:
        return {}
    return parse_thresholds(Path(args.threshold_file).read_text(encoding="utf-8"))


def _choose_engine(engine, sys_, f):
    if engine != "auto":
        return engine
    if sys_.affine_form() is not None and f.terms is not None:
        return "exact"
    return "quadrature"


def cmd_spectrum(args) -> int:
    file_cfg = load_config(args.config) if args.config else {}
    flags = {k: getattr(args, k) for k in (
        "system", "alpha", "beta", "cocycle", "observable", "engine",
        "nmax", "resolution", "orbit_len", "seed", "out")}
    cfg = coerce(merged(file_cfg, flags))
    sys_ = parse_system(cfg["system"], cfg["alpha"], cfg["beta"], cfg["cocycle"])
    f = parse_observable(cfg["observable"], sys_)
    engine = _choose_engine(cfg["engine"], sys_, f)
    nmax = cfg["nmax"]
    if engine == "exact":
        c = corr_exact(sys_, f, nmax)
    elif engine == "quadrature":
        c = corr_quadrature(sys_, f, nmax, cfg["resolution"])
    elif engine == "birkhoff":
        c = corr_birkhoff(sys_, f, nmax, cfg["orbit_len"], seed=cfg["seed"])
    else:
        raise NoClosedFormError(f"unknown engine {engine!r}")
    th = Thresholds.from_mapping({**file_cfg, **_thresholds_from(args)})
    summary = classify(c, th)
    ok = True
    if c.nmax <= PSD_MAX_NMAX:
        psd = validate_psd(c)
        ok = psd.passed
        print(f"psd: {'PASS' if psd.passed else 'FAIL'} min eigenvalue {psd.min_eigenvalue:.3e} "
              f">= {psd.threshold:.3e}")
    written = nio.write_spectrum(cfg["out"], args.stem, c, summary)
    print(f"engine: {engine}  c(0) = {c.c0:.12g}  label: {summary.label}")
    for theta, mass in summary.atoms:
        print(f"  atom theta = {theta:.12f}  mass = {mass:.6g}")
    for p in written:
        print(f"wrote {p}")
    return 0 if ok else 1


def _parse_sets(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise NilspecError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def cmd_verify(args) -> int:
    overrides = {}
    if args.config:
        overrides.update(load_config(args.config))
    overrides.update(_thresholds_from(args))
    for k in ("alpha", "beta", "engine", "nmax", "resolution", "orbit_len", "seed"):
        if getattr(args, k) is not None:
            overrides[k] = getattr(args, k)
    overrides.update(_parse_sets(args.set))
    out = Path(args.out or overrides.pop("out", "out"))
    overrides.pop("out", None)
    reports = run_suite(args.scenarios or None, overrides, parallel=args.parallel)
    for r in reports:
        print("\n".join(r.lines()))
        emit_outputs(r, out)
    failed = [r.spec.name for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} scenarios passed; outputs in {out}")
    return 0 if not failed else 1


def _expand(inputs):
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            yield from sorted(p.glob("*.corr.csv"))
        else:
            yield p


def cmd_report(args) -> int:
    th = Thresholds.from_mapping(_thresholds_from(args))
    out = Path(args.out or "out/report")
    ok = True
    for path in _expand(args.inputs):
        c = nio.read_corr(path)
        summary = classify(c, th)
        stem = path.name[: -len(".corr.csv")] if path.name.endswith(".corr.csv") else path.stem
        nio.write_spectrum(out, stem, c, summary)
        psd = validate_psd(c) if c.nmax <= PSD_MAX_NMAX else None
        ok &= psd is None or psd.passed
        print(f"{stem}: {summary.label} ({len(summary.atoms)} atoms)"
              + ("" if psd is None else f", psd {'PASS' if psd.passed else 'FAIL'}"))
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"spectrum": cmd_spectrum, "verify": cmd_verify, "report": cmd_report}[args.command]
    try:
        return handler(args)
    except (NilspecError, OSError, ValueError, KeyError) as exc:
        print(f"nilspec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
