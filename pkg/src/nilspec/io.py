"""Reading and writing correlation sequences, densities, summaries and plots.

Floats are written with ``repr`` so a CSV round trip is exact. Files are
written in a fixed order with sorted JSON keys, which keeps outputs of the
exact and quadrature engines byte-identical across runs.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .correlation import CorrSeq

SCHEMA_VERSION = "1.0"

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "nilspec spectral summary",
    "type": "object",
    "required": ["schema_version", "label", "atoms", "wiener", "thresholds", "diagnostics"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "label": {"enum": ["discrete", "continuous", "mixed", "inconclusive"]},
        "atoms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["theta", "mass"],
                "properties": {
                    "theta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                    "mass": {"type": "number", "minimum": 0},
                },
            },
        },
        "wiener": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["ladder", "trace"],
                    "properties": {
                        "ladder": {"type": "array", "items": {"type": "integer"}},
                        "trace": {"type": "array", "items": {"type": "number"}},
                    },
                },
            ]
        },
        "thresholds": {"type": "object", "additionalProperties": {"type": "number"}},
        "diagnostics": {
            "type": "object",
            "required": ["c0", "nmax", "atomic_mass", "continuous_mass", "mass_residual"],
        },
        "provenance": {"type": "object"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "nilspec run report",
    "type": "object",
    "required": ["schema_version", "scenario", "spec", "passed", "checks", "evidence"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenario": {"type": "string"},
        "spec": {"type": "object"},
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "value", "threshold"],
            },
        },
        "evidence": {"type": "object"},
    },
}


class OutputError(OSError):
    pass


def _write(path: Path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


# -- correlation sequences ----------------------------------------------------------


def corr_to_csv(c: CorrSeq) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "re", "im"])
    for n, v in zip(c.lags, c.values):
        w.writerow([int(n), repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def parse_corr_csv(text: str, provenance=None) -> CorrSeq:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["n", "re", "im"]:
        raise ValueError("correlation CSV must start with the header n,re,im")
    body = rows[1:]
    lags = [int(r[0]) for r in body]
    nmax = (len(body) - 1) // 2
    if lags != list(range(-nmax, nmax + 1)):
        raise ValueError("correlation CSV must list lags -nmax..nmax in order")
    values = np.array([complex(float(r[1]), float(r[2])) for r in body])
    return CorrSeq(nmax, values, dict(provenance or {}))


def write_corr(c: CorrSeq, path) -> tuple[Path, Path]:
    """Write ``path`` (CSV) and a ``.provenance.json`` sidecar next to it."""
    path = Path(path)
    csv_path = _write(path, corr_to_csv(c))
    side = _write(path.with_suffix(".provenance.json"), dumps_json(c.provenance))
    return csv_path, side


def read_corr(path) -> CorrSeq:
    path = Path(path)
    side = path.with_suffix(".provenance.json")
    prov = json.loads(_read(side)) if side.exists() else {}
    return parse_corr_csv(_read(path), prov)


# -- densities and summaries ---------------------------------------------------------


def density_to_csv(theta, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "value"])
    for t, v in zip(theta, values):
        w.writerow([repr(float(t)), repr(float(v))])
    return buf.getvalue()


def parse_density_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["theta", "value"]:
        raise ValueError("density CSV must start with the header theta,value")
    arr = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def summary_document(summary, provenance=None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, **summary.to_dict()}
    if provenance is not None:
        doc["provenance"] = provenance
    return to_jsonable(doc)


# -- SVG ------------------------------------------------------------------------


def density_svg(densities, atoms=(), width=640, height=360, title="") -> str:
    """Line plot of one or more densities on [0, 1) with atoms as vertical markers.

    ``densities`` is a list of ``(label, theta, values)``; ``atoms`` a list of
    ``(theta, mass)``. Every density becomes one ``<polyline>`` and every atom
    one ``<line class="atom">``.
    """
    pad = 40
    W, H = width - 2 * pad, height - 2 * pad
    tops = [float(np.max(v)) for _, _, v in densities if len(v)]
    bottoms = [float(np.min(v)) for _, _, v in densities if len(v)]
    ymax = max(tops + [m for _, m in atoms] + [1e-12])
    ymin = min(bottoms + [0.0])
    span = ymax - ymin or 1.0

    def px(t):
        return pad + W * float(t)

    def py(v):
        return pad + H * (1.0 - (float(v) - ymin) / span)

    colors = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{pad}" y="{pad}" width="{W}" height="{H}" fill="none" stroke="#999"/>',
    ]
    if title:
        out.append(f'<text x="{pad}" y="{pad - 12}" font-size="14">{_escape(title)}</text>')
    for i, (label, theta, values) in enumerate(densities):
        pts = " ".join(f"{px(t):.3f},{py(v):.3f}" for t, v in zip(theta, values))
        out.append(
            f'<polyline class="density" data-label="{_escape(label)}" fill="none" '
            f'stroke="{colors[i % len(colors)]}" points="{pts}"/>'
        )
    for theta, mass in atoms:
        x = px(theta)
        out.append(
            f'<line class="atom" x1="{x:.3f}" y1="{py(ymin):.3f}" x2="{x:.3f}" '
            f'y2="{py(mass):.3f}" stroke="#d62728" stroke-width="2" '
            f'data-theta="{theta!r}" data-mass="{mass!r}"/>'
        )
    out.append(f'<text x="{pad}" y="{height - 12}" font-size="11">theta in [0, 1)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


# -- bundles --------------------------------------------------------------------


def write_spectrum(out_dir, stem: str, c: CorrSeq, summary, formats=("csv", "json", "svg")) -> list[Path]:
    """Write the correlation, density, summary and plot of one spectrum run."""
    out_dir = Path(out_dir)
    written = []
    if "csv" in formats:
        written += list(write_corr(c, out_dir / f"{stem}.corr.csv"))
        d = summary.density
        written.append(_write(out_dir / f"{stem}.density.csv", density_to_csv(d.theta, d.values)))
    if "json" in formats:
        doc = summary_document(summary, c.provenance)
        written.append(_write(out_dir / f"{stem}.summary.json", dumps_json(doc)))
    if "svg" in formats:
        d = summary.density
        svg = density_svg([(stem, d.theta, d.values)], summary.atoms, title=stem)
        written.append(_write(out_dir / f"{stem}.density.svg", svg))
    return written


def write_json(path, obj) -> Path:
    return _write(Path(path), dumps_json(obj))


def read_json(path):
    return json.loads(_read(path))


def write_text(path, text: str) -> Path:
    return _write(Path(path), text)


def read_text(path) -> str:
    return _read(path)
