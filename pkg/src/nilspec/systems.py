"""Measure-preserving systems on unit cubes.

Every system acts on states stored as float arrays whose last axis is the
state dimension; a single state is a 1-d array, a batch is ``(N, dim)``.
All state spaces are half-open unit cubes carrying Lebesgue measure, which
is the invariant (Haar) measure in the chosen coordinates.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, FactorConsistencyError, NodeCapExceededError
from .nilalgebra import TranslationConfig, heis_pow_closed, mul_arrays

DEFAULT_NODE_CAP = 1 << 24
ORBIT_CHUNK = 1 << 16


def wrap(t):
    """Reduce modulo 1 into [0, 1), flooring toward negative infinity."""
    t = np.asarray(t, dtype=float)
    out = t - np.floor(t)
    return np.where(out >= 1.0, 0.0, out)


def circle_distance(t):
    """Distance to the nearest integer."""
    t = np.asarray(t, dtype=float)
    return np.abs(t - np.round(t))


def _vec(alpha) -> tuple[float, ...]:
    return tuple(float(a) for a in np.atleast_1d(alpha))


class System:
    """Base class; subclasses fill in ``kind``, ``dim`` and ``step``."""

    kind = "abstract"
    dim = 0
    has_closed_form = False

    def _check(self, states):
        s = np.asarray(states, dtype=float)
        if s.shape[-1] != self.dim:
            raise DimensionMismatchError(
                f"{self.kind} system has dimension {self.dim}, got states of shape {s.shape}"
            )
        return s

    def step(self, states):
        raise NotImplementedError

    def iterate(self, states, n: int, closed_form: bool = True):
        if n < 0:
            raise ValueError("iterate needs n >= 0")
        s = self._check(states)
        if closed_form and self.has_closed_form:
            return self._iterate_closed(s, int(n))
        for _ in range(int(n)):
            s = self.step(s)
        return s

    def _iterate_closed(self, s, n):
        raise NotImplementedError

    def orbit_array(self, s0, length: int) -> np.ndarray:
        """The first ``length`` points of the orbit of ``s0`` by sequential stepping."""
        s0 = self._check(s0)
        out = np.empty((length, self.dim))
        if length:
            out[0] = s0
        for i in range(1, length):
            out[i] = self.step(out[i - 1])
        return out

    def affine_form(self):
        """(A, b) with T(s) = A s + b mod 1 and A unipotent integral, or None."""
        return None

    def describe(self) -> dict:
        raise NotImplementedError

    def default_start(self) -> np.ndarray:
        return np.full(self.dim, 0.1)


@dataclass(frozen=True, eq=False)
class Rotation(System):
    alpha: tuple[float, ...]

    kind = "rotation"
    has_closed_form = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", _vec(self.alpha))

    @property
    def dim(self):
        return len(self.alpha)

    def step(self, states):
        return wrap(self._check(states) + np.asarray(self.alpha))

    def _iterate_closed(self, s, n):
        return wrap(s + n * np.asarray(self.alpha))

    def orbit_array(self, s0, length):
        A, b = self.affine_form()
        return kernels.affine_orbit(A, b, wrap(self._check(s0)), length)

    def affine_form(self):
        return np.eye(self.dim, dtype=np.int64), np.asarray(self.alpha)

    def describe(self):
        return {"kind": self.kind, "alpha": list(self.alpha)}


@dataclass(frozen=True, eq=False)
class Weyl(System):
    """The unipotent affine map (u, v) -> (u + alpha, v + u) on T^d x T^d."""

    alpha: tuple[float, ...]

    kind = "weyl"
    has_closed_form = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", _vec(self.alpha))

    @property
    def d(self):
        return len(self.alpha)

    @property
    def dim(self):
        return 2 * len(self.alpha)

    def step(self, states):
        s = self._check(states)
        d = self.d
        out = np.empty_like(s)
        out[..., :d] = s[..., :d] + np.asarray(self.alpha)
        out[..., d:] = s[..., d:] + s[..., :d]
        return wrap(out)

    def _iterate_closed(self, s, n):
        d = self.d
        a = np.asarray(self.alpha)
        out = np.empty_like(s)
        out[..., :d] = s[..., :d] + n * a
        out[..., d:] = s[..., d:] + n * s[..., :d] + (n * (n - 1) // 2) * a
        return wrap(out)

    def orbit_array(self, s0, length):
        A, b = self.affine_form()
        return kernels.affine_orbit(A, b, wrap(self._check(s0)), length)

    def affine_form(self):
        d = self.d
        A = np.eye(2 * d, dtype=np.int64)
        A[d:, :d] = np.eye(d, dtype=np.int64)
        b = np.concatenate([np.asarray(self.alpha), np.zeros(d)])
        return A, b

    def describe(self):
        return {"kind": self.kind, "alpha": list(self.alpha)}


@dataclass(frozen=True, eq=False)
class Heisenberg(System):
    """Left translation by a = (alpha, beta, 0) on the Heisenberg nilmanifold."""

    cfg: TranslationConfig = TranslationConfig()

    kind = "heisenberg"
    dim = 3
    has_closed_form = True

    def step(self, states):
        s = self._check(states)
        a = self.cfg
        out = np.empty_like(s)
        out[..., 0] = s[..., 0] + a.alpha
        out[..., 1] = s[..., 1] + a.beta
        out[..., 2] = s[..., 2] + a.alpha * s[..., 1]
        return kernels.heis_reduce(out)

    def _iterate_closed(self, s, n):
        an = np.asarray(heis_pow_closed(self.cfg.element, n))
        return kernels.heis_reduce(mul_arrays(an, s))

    def orbit_array(self, s0, length):
        s0 = kernels.heis_reduce(self._check(s0))
        return kernels.heis_orbit(self.cfg.alpha, self.cfg.beta, s0, length)

    def describe(self):
        return {"kind": self.kind, "alpha": self.cfg.alpha, "beta": self.cfg.beta}


@dataclass(frozen=True)
class TrigCocycle:
    """phi(x) = constant + sum_j Re(c_j e(k_j x)) for integer frequencies k_j."""

    constant: float = 0.0
    terms: tuple[tuple[int, complex], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((int(k), complex(c)) for k, c in self.terms)
        )

    @property
    def is_constant(self):
        return all(c == 0 for _, c in self.terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, float(self.constant))
        for k, c in self.terms:
            out += (c * np.exp(2j * np.pi * k * x)).real
        return out

    def birkhoff_sum(self, x, n: int, alpha: float):
        """sum_{i < n} phi(x + i alpha), summed in closed form term by term."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, n * float(self.constant))
        for k, c in self.terms:
            theta = k * alpha
            ratio = cmath.exp(2j * math.pi * theta)
            if abs(ratio - 1.0) < 1e-15:
                dn = complex(n)
            else:
                dn = (cmath.exp(2j * math.pi * n * theta) - 1.0) / (ratio - 1.0)
            out += (c * dn * np.exp(2j * np.pi * k * x)).real
        return out

    def describe(self):
        return {
            "constant": self.constant,
            "terms": [[k, [c.real, c.imag]] for k, c in self.terms],
        }


@dataclass(frozen=True, eq=False)
class Skew(System):
    """T(x, y) = (x + alpha, y + phi(x)) on the 2-torus."""

    alpha: float
    cocycle: TrigCocycle = TrigCocycle()

    kind = "skew"
    dim = 2
    has_closed_form = True

    def step(self, states):
        s = self._check(states)
        out = np.empty_like(s)
        out[..., 0] = s[..., 0] + self.alpha
        out[..., 1] = s[..., 1] + self.cocycle(s[..., 0])
        return wrap(out)

    def _iterate_closed(self, s, n):
        out = np.empty_like(s)
        out[..., 0] = s[..., 0] + n * self.alpha
        out[..., 1] = s[..., 1] + self.cocycle.birkhoff_sum(s[..., 0], n, self.alpha)
        return wrap(out)

    def orbit_array(self, s0, length):
        s0 = wrap(self._check(s0))
        if length == 0:
            return np.empty((0, 2))
        xs = kernels.affine_orbit(np.eye(1, dtype=np.int64), [self.alpha], s0[:1], length)
        inc = self.cocycle(xs[:-1, 0])[:, None]
        ys = kernels.circle_cumsum(s0[1:], inc)
        return np.hstack([xs, ys])

    def affine_form(self):
        if not self.cocycle.is_constant:
            return None
        return np.eye(2, dtype=np.int64), np.array([self.alpha, self.cocycle.constant])

    def describe(self):
        return {"kind": self.kind, "alpha": self.alpha, "cocycle": self.cocycle.describe()}


@dataclass(frozen=True, eq=False)
class Product(System):
    """Independent product; the state is the concatenation of component states."""

    components: tuple[System, ...]

    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def dim(self):
        return sum(c.dim for c in self.components)

    @property
    def has_closed_form(self):
        return all(c.has_closed_form for c in self.components)

    def slices(self):
        start = 0
        for c in self.components:
            yield c, slice(start, start + c.dim)
            start += c.dim

    def step(self, states):
        s = self._check(states)
        return np.concatenate([c.step(s[..., sl]) for c, sl in self.slices()], axis=-1)

    def iterate(self, states, n, closed_form=True):
        s = self._check(states)
        parts = [c.iterate(s[..., sl], n, closed_form) for c, sl in self.slices()]
        return np.concatenate(parts, axis=-1)

    def orbit_array(self, s0, length):
        s0 = self._check(s0)
        return np.hstack([c.orbit_array(s0[sl], length) for c, sl in self.slices()])

    def affine_form(self):
        forms = [c.affine_form() for c in self.components]
        if any(f is None for f in forms):
            return None
        A = np.zeros((self.dim, self.dim), dtype=np.int64)
        for (c, sl), (Ac, _) in zip(self.slices(), forms):
            A[sl, sl] = Ac
        return A, np.concatenate([b for _, b in forms])

    def describe(self):
        return {"kind": self.kind, "components": [c.describe() for c in self.components]}


# -- joinings ----------------------------------------------------------------


@dataclass(frozen=True)
class FactorCoordinate:
    """Cocycle (u, w) -> u + shift, the factor map of a Weyl base onto its rotation."""

    d: int = 1
    shift: tuple[float, ...] = ()

    def __call__(self, base_states):
        s = np.asarray(base_states, dtype=float)
        shift = np.asarray(self.shift or (0.0,) * self.d)
        return wrap(s[..., : self.d] + shift)

    def describe(self):
        return {"type": "factor-coordinate", "d": self.d, "shift": list(self.shift)}


@dataclass(frozen=True)
class ZeroCocycle:
    d: int = 1

    def __call__(self, base_states):
        s = np.asarray(base_states, dtype=float)
        return np.zeros(s.shape[:-1] + (self.d,))

    def describe(self):
        return {"type": "zero", "d": self.d}


@dataclass(frozen=True)
class JoiningSpec:
    """Data of the joining Z = X x T^d, T(x, v) = (S x, v + cocycle(x)).

    ``base`` is a Weyl system on T^d x T^d, ``rotation`` the rotation vector
    of the common factor and ``cocycle`` maps base states to T^d.
    """

    base: Weyl
    rotation: tuple[float, ...]
    cocycle: Callable = field(default_factory=FactorCoordinate)

    @property
    def fiber_dim(self):
        return self.base.d


@dataclass(frozen=True, eq=False)
class Joining(System):
    spec: JoiningSpec

    kind = "joining"

    @property
    def dim(self):
        return self.spec.base.dim + self.spec.fiber_dim

    def split(self, states):
        s = self._check(states)
        b = self.spec.base.dim
        return s[..., :b], s[..., b:]

    def step(self, states):
        x, v = self.split(states)
        return np.concatenate(
            [self.spec.base.step(x), wrap(v + self.spec.cocycle(x))], axis=-1
        )

    def orbit_array(self, s0, length):
        x0, v0 = self.split(wrap(s0))
        xs = self.spec.base.orbit_array(x0, length)
        if length == 0:
            return np.empty((0, self.dim))
        vs = kernels.circle_cumsum(v0, self.spec.cocycle(xs[:-1]))
        return np.hstack([xs, vs])

    def describe(self):
        cocycle = self.spec.cocycle
        return {
            "kind": self.kind,
            "base": self.spec.base.describe(),
            "rotation": list(self.spec.rotation),
            "cocycle": cocycle.describe() if hasattr(cocycle, "describe") else repr(cocycle),
        }


@dataclass(frozen=True)
class FactorMap:
    """pi((u, w), v) = (u, w + v) together with the twisted target map."""

    spec: JoiningSpec

    def __call__(self, states):
        s = np.asarray(states, dtype=float)
        base = self.spec.base
        d = base.d
        out = np.array(s[..., : base.dim], copy=True)
        out[..., d:] = wrap(out[..., d:] + s[..., base.dim:])
        return out

    def target_step(self, base_states):
        """R_a on the base: the Weyl step followed by the central twist by the cocycle."""
        s = np.asarray(base_states, dtype=float)
        d = self.spec.base.d
        out = self.spec.base.step(s)
        out[..., d:] = wrap(out[..., d:] + self.spec.cocycle(s))
        return out


def check_joining_spec(spec: JoiningSpec, samples: int = 256, seed: int = 0) -> dict:
    """Numerical check that the cocycle is a factor map onto the rotation.

    Returns the maximal deviations of cocycle(S x) - cocycle(x) - rotation and
    of cocycle(x + (0, v)) - cocycle(x); both must vanish modulo 1.
    """
    rng = np.random.default_rng(seed)
    base = spec.base
    x = rng.random((samples, base.dim))
    v = rng.random((samples, base.d))
    c0 = spec.cocycle(x)
    rot = circle_distance(spec.cocycle(base.step(x)) - c0 - np.asarray(spec.rotation))
    shifted = np.array(x, copy=True)
    shifted[:, base.d:] = wrap(shifted[:, base.d:] + v)
    fib = circle_distance(spec.cocycle(shifted) - c0)
    return {"rotation_deviation": float(rot.max()), "fiber_deviation": float(fib.max())}


def build_joining(spec: JoiningSpec, tol: float = 1e-9) -> tuple[Joining, FactorMap]:
    if len(spec.rotation) != spec.fiber_dim:
        raise DimensionMismatchError("rotation vector must have the fiber dimension")
    dev = check_joining_spec(spec)
    worst = max(dev.values())
    if worst > tol:
        raise FactorConsistencyError("cocycle is not a factor map onto the rotation", worst)
    return Joining(spec), FactorMap(spec)


# -- module-level operations ---------------------------------------------------


def step(sys: System, s):
    return sys.step(s)


def iterate(sys: System, s, n: int, closed_form: bool = True):
    return sys.iterate(s, n, closed_form=closed_form)


def quadrature_nodes(sys: System, resolution: int, node_cap: int = DEFAULT_NODE_CAP):
    """Midpoint tensor grid on the state cube: ``(nodes, weights)``, weights sum to 1."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    count = resolution ** sys.dim
    if count > node_cap:
        raise NodeCapExceededError(
            f"{resolution}^{sys.dim} = {count} nodes exceeds the cap of {node_cap}"
        )
    axis = (np.arange(resolution) + 0.5) / resolution
    grids = np.meshgrid(*([axis] * sys.dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.full(count, 1.0 / count)
    return nodes, weights


def orbit(sys: System, s0, length: int) -> Iterator[np.ndarray]:
    """Lazily yield s0, T s0, ..., T^(length-1) s0 in bounded memory."""
    if length < 1:
        raise ValueError("orbit length must be >= 1")
    current = np.asarray(s0, dtype=float)
    remaining = length
    first = True
    while remaining:
        take = min(ORBIT_CHUNK, remaining + (0 if first else 1))
        block = sys.orbit_array(current, take)
        if not first:
            block = block[1:]
        yield from block
        remaining -= len(block)
        current = block[-1]
        first = False


def product(*components: System) -> Product:
    return Product(tuple(components))


def as_start(sys: System, s0: Sequence[float] | None) -> np.ndarray:
    if s0 is None:
        return sys.default_start()
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (sys.dim,):
        raise DimensionMismatchError(f"start point must have shape ({sys.dim},)")
    return s0
