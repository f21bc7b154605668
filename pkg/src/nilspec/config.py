"""Flat ``key = value`` configuration and the system / observable grammar.

System strings::

    rotation | weyl | heisenberg | skew | joining | product:rotation+weyl

``alpha`` is a comma separated list; a d-dimensional rotation or Weyl
system takes d entries, product components take one entry each (cycling).
The skew cocycle is ``const,k:coef,k:coef`` with Python complex literals,
e.g. ``0,1:0.5,2:0.25j``.

Observable strings::

    char:n=1,m=0         character e(n u + m v) (vector parts joined by |)
    char:1|0|0           explicit frequency vector
    zak:m=1,sigma=1,J=6  Gaussian profile lifted to the nilmanifold
    poly:1|0:0.5,0|1:0.5 trigonometric polynomial, frequency:coefficient
    f1*f2                tensor product on a product system
"""
from __future__ import annotations

import math
from pathlib import Path

from .errors import SpecSyntaxError
from .nilalgebra import TranslationConfig
from .observables import Observable, ZakProfile, tensor, torus_character, trig_polynomial, zak_observable
from .systems import (
    FactorCoordinate,
    Heisenberg,
    JoiningSpec,
    Product,
    Rotation,
    Skew,
    System,
    TrigCocycle,
    Weyl,
    build_joining,
)

DEFAULT_ALPHA = math.sqrt(2) - 1
DEFAULT_BETA = math.sqrt(3) - 1

# every recognised key with its default and parser
DEFAULTS = {
    "system": "weyl",
    "alpha": repr(DEFAULT_ALPHA),
    "beta": repr(DEFAULT_BETA),
    "cocycle": "0,1:0.5",
    "observable": "char:n=0,m=1",
    "engine": "auto",
    "nmax": "256",
    "resolution": "64",
    "orbit_len": "1000000",
    "seed": "",
    "out": "out",
}

INT_KEYS = {"nmax", "resolution", "orbit_len"}


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for i, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        if "=" not in line:
            raise SpecSyntaxError(f"{source}:{i}: expected key = value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise SpecSyntaxError(f"{source}:{i}: empty key")
        out[key.replace("-", "_")] = value
    return out


def load_config(path) -> dict[str, str]:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def merged(*layers) -> dict[str, str]:
    """Later layers win; ``None`` values are ignored so unset CLI flags do not override."""
    out = dict(DEFAULTS)
    for layer in layers:
        out.update({k: str(v) for k, v in (layer or {}).items() if v is not None})
    return out


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError as exc:
        raise SpecSyntaxError(f"bad number list {text!r}") from exc


def parse_cocycle(text: str) -> TrigCocycle:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        return TrigCocycle()
    try:
        const = float(parts[0])
        terms = []
        for p in parts[1:]:
            k, c = p.split(":", 1)
            terms.append((int(k), complex(c)))
    except ValueError as exc:
        raise SpecSyntaxError(f"bad cocycle {text!r}; expected const,k:coef,...") from exc
    return TrigCocycle(const, tuple(terms))


def _simple_system(kind: str, alphas, beta, cocycle) -> System:
    if kind == "rotation":
        return Rotation(alphas)
    if kind == "weyl":
        return Weyl(alphas)
    if kind == "heisenberg":
        return Heisenberg(TranslationConfig(alphas[0], beta))
    if kind == "skew":
        return Skew(alphas[0], cocycle)
    if kind == "joining":
        spec = JoiningSpec(Weyl(alphas), tuple(alphas), FactorCoordinate(len(alphas)))
        return build_joining(spec)[0]
    raise SpecSyntaxError(f"unknown system kind {kind!r}")


def parse_system(text: str, alpha=None, beta=None, cocycle=None) -> System:
    alphas = parse_floats(alpha) if alpha is not None else (DEFAULT_ALPHA,)
    if not alphas:
        raise SpecSyntaxError("alpha must not be empty")
    beta = float(beta) if beta not in (None, "") else DEFAULT_BETA
    cocycle = parse_cocycle(cocycle) if isinstance(cocycle, str) else (cocycle or TrigCocycle())
    text = str(text).strip().lower()
    if text.startswith("product:"):
        kinds = [k.strip() for k in text[len("product:"):].split("+") if k.strip()]
        if len(kinds) < 2:
            raise SpecSyntaxError("product needs at least two components, e.g. product:rotation+weyl")
        comps = [
            _simple_system(k, (alphas[i % len(alphas)],), beta, cocycle) for i, k in enumerate(kinds)
        ]
        return Product(tuple(comps))
    return _simple_system(text, alphas, beta, cocycle)


def _kv(body: str) -> dict[str, str]:
    out = {}
    for part in body.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise SpecSyntaxError(f"expected key=value in {body!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split("|"))
    except ValueError as exc:
        raise SpecSyntaxError(f"bad integer vector {text!r}") from exc


def _char_freq(body: str, sys: System) -> tuple[int, ...]:
    if "=" not in body:
        return _ints(body)
    kv = _kv(body)
    n = _ints(kv.get("n", "0"))
    m = _ints(kv["m"]) if "m" in kv else None
    if isinstance(sys, Rotation):
        if m is not None:
            raise SpecSyntaxError("rotation characters take only n")
        return n
    if isinstance(sys, Weyl):
        m = m or (0,) * len(n)
        return n + m
    if isinstance(sys, Heisenberg):
        return n + (m or (0,)) + (0,)
    return n + (m or (0,) * (sys.dim - len(n)))


def parse_observable(text: str, sys: System) -> Observable:
    text = str(text).strip()
    if "*" in text:
        if not isinstance(sys, Product):
            raise SpecSyntaxError("tensor observables need a product system")
        parts = [p.strip() for p in text.split("*")]
        if len(parts) != len(sys.components):
            raise SpecSyntaxError("one tensor factor per product component is required")
        obs = [parse_observable(p, c) for p, c in zip(parts, sys.components)]
        out = obs[0]
        for o in obs[1:]:
            out = tensor(out, o)
        return out
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if kind == "char":
        return torus_character(_char_freq(body, sys), sys)
    if kind == "zak":
        if not isinstance(sys, Heisenberg):
            raise SpecSyntaxError("zak observables live on the heisenberg system")
        kv = _kv(body)
        prof = ZakProfile(int(kv.get("m", 1)), float(kv.get("sigma", 1.0)), int(kv.get("J", 6)))
        return zak_observable(prof)
    if kind == "poly":
        terms = []
        for part in body.split(","):
            if not part.strip():
                continue
            freq, _, coef = part.rpartition(":")
            if not freq:
                raise SpecSyntaxError(f"poly term {part!r} needs frequency:coefficient")
            terms.append((_ints(freq), complex(coef)))
        return trig_polynomial(terms, sys)
    raise SpecSyntaxError(f"unknown observable kind {kind!r}")


def coerce(cfg: dict[str, str]) -> dict:
    """Typed view of a merged configuration."""
    out = dict(cfg)
    for key in INT_KEYS:
        try:
            out[key] = int(float(cfg[key]))
        except (KeyError, ValueError) as exc:
            raise SpecSyntaxError(f"{key} must be an integer, got {cfg.get(key)!r}") from exc
    out["seed"] = int(cfg["seed"]) if str(cfg.get("seed", "")).strip() else None
    return out


def parse_thresholds(text: str) -> dict[str, float]:
    try:
        return {k: float(v) for k, v in parse_config_text(text, "<thresholds>").items()}
    except ValueError as exc:
        raise SpecSyntaxError(f"threshold values must be numbers: {exc}") from exc
