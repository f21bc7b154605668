"""Test functions on the state spaces of :mod:`nilspec.systems`.

An :class:`Observable` wraps a vectorised evaluator (states of shape
``(..., dim)`` to complex values) together with a claim about which
invariant subspace it lives in. The claims are checked by the test suite,
never trusted by the engines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, TruncationError
from .nilalgebra import HeisElement, heis_inv, mul_arrays
from .systems import Heisenberg, Rotation, Skew, System, Weyl, quadrature_nodes

KRONECKER = "kronecker"
CENTER = "center_character"
GENERIC = "generic"

DEFAULT_CENTER_RESOLUTION = 64
DEFAULT_TRUNCATION_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class Observable:
    evaluator: Callable[[np.ndarray], np.ndarray]
    tag: str = GENERIC
    m: int | None = None
    norm_hint: float | None = None
    label: str = ""
    dim: int | None = None
    # exact descriptions used by the closed-form engines
    terms: tuple[tuple[tuple[int, ...], complex], ...] | None = None
    factors: tuple["Observable", ...] | None = None
    zak: "ZakProfile | None" = None

    def __call__(self, states) -> np.ndarray:
        s = np.asarray(states, dtype=float)
        if self.dim is not None and s.shape[-1] != self.dim:
            raise DimensionMismatchError(
                f"observable {self.label or '<anon>'} expects dimension {self.dim}, got {s.shape}"
            )
        return np.asarray(self.evaluator(s), dtype=np.complex128)

    @property
    def is_character(self) -> bool:
        return self.terms is not None and len(self.terms) == 1 and self.terms[0][1] == 1

    @property
    def freq(self) -> tuple[int, ...] | None:
        return self.terms[0][0] if self.is_character else None

    @property
    def subspace(self) -> str:
        if self.tag == CENTER:
            return f"{CENTER}({self.m})"
        return self.tag


def _phase(states, freq):
    return np.exp(2j * np.pi * (states @ np.asarray(freq, dtype=float)))


def _character_tag(freq, sys: System | None):
    if sys is None:
        return GENERIC, None
    if isinstance(sys, Rotation):
        return KRONECKER, None
    if isinstance(sys, Weyl):
        return (KRONECKER, None) if not any(freq[sys.d:]) else (GENERIC, None)
    if isinstance(sys, Heisenberg):
        # e(n x + m y) descends to G/Gamma and is a function on the base torus
        return (KRONECKER, None) if freq[2] == 0 else (GENERIC, None)
    if isinstance(sys, Skew):
        return (KRONECKER, None) if freq[1] == 0 else (GENERIC, None)
    return GENERIC, None


def torus_character(freq: Sequence[int], sys: System | None = None) -> Observable:
    """s -> e(freq . s); tagged kronecker when the system makes it an eigenfunction."""
    freq = tuple(int(k) for k in freq)
    if sys is not None and len(freq) != sys.dim:
        raise DimensionMismatchError(
            f"frequency {freq} does not match {sys.kind} dimension {sys.dim}"
        )
    tag, m = _character_tag(freq, sys)
    return Observable(
        evaluator=lambda s: _phase(s, freq),
        tag=tag,
        m=m,
        norm_hint=1.0,
        label="char:" + "|".join(map(str, freq)),
        dim=len(freq),
        terms=((freq, 1 + 0j),),
    )


def trig_polynomial(terms, sys: System | None = None) -> Observable:
    """sum_j c_j e(xi_j . s) from ``[(xi_j, c_j), ...]``; repeated frequencies are merged."""
    merged: dict[tuple[int, ...], complex] = {}
    for freq, coef in terms:
        key = tuple(int(k) for k in freq)
        merged[key] = merged.get(key, 0j) + complex(coef)
    merged = {k: c for k, c in merged.items() if c != 0}
    dims = {len(k) for k in merged}
    if len(dims) > 1:
        raise DimensionMismatchError("trigonometric polynomial mixes frequency dimensions")
    dim = dims.pop() if dims else (sys.dim if sys is not None else None)
    if sys is not None and dim != sys.dim:
        raise DimensionMismatchError(f"frequencies have dimension {dim}, system {sys.dim}")
    items = tuple(merged.items())
    freqs = np.array([k for k, _ in items], dtype=float).reshape(len(items), dim or 0)
    coefs = np.array([c for _, c in items], dtype=np.complex128)

    def evaluate(s):
        if not items:
            return np.zeros(s.shape[:-1], dtype=np.complex128)
        return np.exp(2j * np.pi * (s @ freqs.T)) @ coefs

    tags = {_character_tag(k, sys)[0] for k, _ in items}
    tag = KRONECKER if tags == {KRONECKER} else GENERIC
    label = "poly:" + ",".join("|".join(map(str, k)) + f":{c!r}" for k, c in items)
    return Observable(
        evaluator=evaluate,
        tag=tag,
        norm_hint=float(np.sum(np.abs(coefs) ** 2)),
        label=label,
        dim=dim,
        terms=items,
    )


def constant(value: complex = 1.0, dim: int | None = None) -> Observable:
    value = complex(value)
    terms = (((0,) * dim, value),) if dim is not None else None
    return Observable(
        evaluator=lambda s: np.full(s.shape[:-1], value, dtype=np.complex128),
        tag=KRONECKER,
        norm_hint=abs(value) ** 2,
        label=f"const:{value!r}",
        dim=dim,
        terms=terms,
    )


def tensor(f: Observable, g: Observable) -> Observable:
    """(f ⊗ g)(s, t) = f(s) g(t) on a product state space."""
    if f.dim is None or g.dim is None:
        raise DimensionMismatchError("tensor factors need a known dimension")
    split = f.dim
    terms = None
    if f.terms is not None and g.terms is not None:
        terms = tuple(
            (kf + kg, cf * cg) for kf, cf in f.terms for kg, cg in g.terms
        )
    return Observable(
        evaluator=lambda s: f(s[..., :split]) * g(s[..., split:]),
        tag=KRONECKER if f.tag == g.tag == KRONECKER else GENERIC,
        norm_hint=(f.norm_hint * g.norm_hint) if f.norm_hint and g.norm_hint else None,
        label=f"({f.label})x({g.label})",
        dim=f.dim + g.dim,
        terms=terms,
        factors=(f, g),
    )


@dataclass(frozen=True)
class ZakProfile:
    """Gaussian profile h(t) = exp(-t^2 / (2 sigma^2)) lifted into V_m."""

    m: int
    sigma: float = 1.0
    J: int = 6

    def __post_init__(self):
        if int(self.m) == 0:
            raise ValueError("zak profile needs a nonzero center character m")
        if self.sigma <= 0 or self.J < 1:
            raise ValueError("zak profile needs sigma > 0 and J >= 1")

    @property
    def tail_bound(self) -> float:
        return math.exp(-0.5 * (self.J / self.sigma) ** 2)

    @property
    def norm2(self) -> float:
        """||h||^2 over the real line, which is also ||f||^2 on the nilmanifold."""
        return self.sigma * math.sqrt(math.pi)


def zak_observable(p: ZakProfile, tol: float = DEFAULT_TRUNCATION_TOL) -> Observable:
    """f(x, y, z) = e(m z) sum_j h(y + j) e(m j x), truncated to |y + j| <= J.

    Truncating on the argument y + j (rather than on j) keeps f exactly
    invariant under the lattice, so it is a genuine function on G/Gamma.
    """
    if p.tail_bound > tol:
        raise TruncationError(
            f"tail bound exp(-(J/sigma)^2/2) = {p.tail_bound:.2e} exceeds {tol:.1e}"
        )
    m, sigma, J = int(p.m), float(p.sigma), int(p.J)
    return Observable(
        evaluator=lambda s: kernels.zak_eval(s, m, sigma, J),
        tag=CENTER,
        m=m,
        norm_hint=p.norm2,
        label=f"zak:m={m},sigma={sigma!r},J={J}",
        dim=3,
        zak=p,
    )


def _center_average(f: Observable, m: int, resolution: int):
    t = (np.arange(resolution) + 0.5) / resolution
    phases = np.exp(-2j * np.pi * m * t) / resolution

    def evaluate(s):
        shifted = np.repeat(s[..., None, :], resolution, axis=-2)
        z = shifted[..., 2] + t
        shifted[..., 2] = z - np.floor(z)
        return f(shifted) @ phases

    return evaluate


def project_center_character(
    f: Observable, m: int, resolution: int = DEFAULT_CENTER_RESOLUTION
) -> Observable:
    """P_m f(g) = int_0^1 e(-m t) f((0, 0, t) g) dt by the midpoint rule."""
    m = int(m)
    return Observable(
        evaluator=_center_average(f, m, resolution),
        tag=KRONECKER if m == 0 else CENTER,
        m=None if m == 0 else m,
        label=f"P[{m}]({f.label})",
        dim=3,
    )


def project_kronecker(f: Observable, resolution: int = DEFAULT_CENTER_RESOLUTION) -> Observable:
    """Average over the center circle; the result only depends on (x, y)."""
    out = project_center_character(f, 0, resolution)
    return Observable(
        evaluator=out.evaluator, tag=KRONECKER, label=f"K({f.label})", dim=3
    )


def left_translate(f: Observable, b) -> Observable:
    """The left-regular action (lambda(b) f)(g) = f(b^-1 g) on the nilmanifold.

    b commutes with the center, so a V_m tag is preserved.
    """
    binv = np.asarray(heis_inv(HeisElement(*b)), dtype=float)

    def evaluate(s):
        return f(kernels.heis_reduce(mul_arrays(binv, s)))

    return Observable(
        evaluator=evaluate,
        tag=f.tag,
        m=f.m,
        norm_hint=f.norm_hint,
        label=f"L[{tuple(float(c) for c in b)}]({f.label})",
        dim=3,
    )


def quadrature_inner(f: Observable, g: Observable, sys: System, resolution: int) -> complex:
    """<f, g> = int f conj(g) under the midpoint rule on the state cube."""
    nodes, weights = quadrature_nodes(sys, resolution)
    return complex(np.sum(weights * f(nodes) * np.conj(g(nodes))))


def sup_distance(f: Observable, g: Observable, states) -> float:
    return float(np.max(np.abs(f(states) - g(states))))


__all__ = [
    "Observable",
    "ZakProfile",
    "KRONECKER",
    "CENTER",
    "GENERIC",
    "torus_character",
    "trig_polynomial",
    "constant",
    "tensor",
    "zak_observable",
    "project_center_character",
    "project_kronecker",
    "left_translate",
    "quadrature_inner",
    "sup_distance",
]
