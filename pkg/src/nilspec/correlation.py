"""Correlation sequences c(n) = <U^n f, f> and their validation.

Three engines produce the same object:

* ``corr_exact`` transports characters through a unipotent affine map and
  is exact up to one rounding per entry;
* ``corr_quadrature`` integrates f(T^n s) conj(f(s)) over the midpoint grid;
* ``corr_birkhoff`` averages lag products along one long orbit.

Only lags n >= 0 are computed; negative lags are filled by Hermitian
reflection, so c(-n) = conj(c(n)) holds exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import kernels
from .errors import NoClosedFormError, OrbitTooShortError
from .nilalgebra import TranslationConfig, parry_solve
from .observables import CENTER, Observable, left_translate
from .systems import DEFAULT_NODE_CAP, Heisenberg, System, as_start, quadrature_nodes

PSD_MAX_NMAX = 512

# documented per-engine tolerances (relative to c(0) for the PSD check)
ENGINE_TOL = {
    "exact": 1e-12,
    "quadrature": 1e-8,
    "birkhoff": 1e-2,
}
PSD_TOL = {"exact": 1e-8, "quadrature": 1e-8, "birkhoff": 1e-3}


@dataclass
class CorrSeq:
    """Hermitian sequence c(-nmax..nmax); ``values[nmax + n]`` holds c(n)."""

    nmax: int
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (2 * self.nmax + 1,):
            raise ValueError(f"expected {2 * self.nmax + 1} values, got {self.values.shape}")

    @classmethod
    def from_nonnegative(cls, c, provenance=None) -> "CorrSeq":
        c = np.asarray(c, dtype=np.complex128)
        nmax = len(c) - 1
        values = np.empty(2 * nmax + 1, dtype=np.complex128)
        values[nmax:] = c
        values[nmax] = c[0].real
        values[:nmax] = np.conj(c[1:][::-1])
        return cls(nmax, values, dict(provenance or {}))

    def __getitem__(self, n):
        return self.values[self.nmax + n]

    @property
    def c0(self) -> float:
        return float(self.values[self.nmax].real)

    @property
    def lags(self) -> np.ndarray:
        return np.arange(-self.nmax, self.nmax + 1)

    def nonnegative(self) -> np.ndarray:
        return self.values[self.nmax:]

    @property
    def engine(self) -> str | None:
        return self.provenance.get("engine")

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.values - np.conj(self.values[::-1]))))

    def truncated(self, nmax: int) -> "CorrSeq":
        if nmax > self.nmax:
            raise ValueError("cannot extend a correlation sequence")
        cut = self.values[self.nmax - nmax : self.nmax + nmax + 1]
        return CorrSeq(nmax, cut.copy(), dict(self.provenance, nmax=nmax))


def _provenance(sys, f, engine, nmax, **extra):
    out = {
        "system": sys.describe(),
        "observable": f.label,
        "subspace": f.subspace,
        "engine": engine,
        "nmax": int(nmax),
        "backend": kernels.BACKEND,
    }
    out.update(extra)
    return out


# -- exact engine ---------------------------------------------------------------


def _exact_moments(A, b, terms, nmax):
    """c(k) for a trigonometric polynomial under s -> A s + b (mod 1).

    e(xi . T s) = e(xi . b) e((A^T xi) . s); after k steps the frequency is
    (A^T)^k xi and the accumulated phase is (sum_{i<k} (A^T)^i xi) . b, which
    is kept as an integer vector. Floats are dyadic rationals, so the phase
    is reduced mod 1 exactly and rounded only once.
    """
    At = np.asarray(A, dtype=np.int64).T
    b = np.asarray(b, dtype=float)
    bq = [Fraction(float(v)) for v in b]
    coef = {tuple(int(v) for v in k): complex(c) for k, c in terms}
    keys = list(coef)
    cur = np.array(keys, dtype=np.int64).reshape(len(keys), len(b))
    acc = np.zeros_like(cur)
    out = np.zeros(nmax + 1, dtype=np.complex128)
    for k in range(nmax + 1):
        total = 0j
        phases = [float(sum(int(q) * bj for q, bj in zip(row, bq)) % 1) for row in acc]
        for i, key in enumerate(keys):
            partner = coef.get(tuple(int(v) for v in cur[i]))
            if partner is not None:
                total += coef[key] * np.conj(partner) * np.exp(2j * np.pi * phases[i])
        out[k] = total
        acc = acc + cur
        cur = cur @ At.T  # rows transform as xi -> A^T xi
    return out


def corr_exact(sys: System, f: Observable, nmax: int) -> CorrSeq:
    """Closed-form moments for trigonometric polynomials on affine torus systems.

    Covers rotations, Weyl systems, skew products with constant cocycle and
    independent products of these, with characters, trigonometric
    polynomials and tensor products of them as observables.
    """
    form = sys.affine_form()
    if form is None:
        raise NoClosedFormError(
            f"no closed form for a {sys.kind} system; use corr_quadrature or corr_birkhoff"
        )
    if f.terms is None:
        raise NoClosedFormError(
            f"observable {f.label!r} is not a trigonometric polynomial; "
            "use corr_quadrature or corr_birkhoff"
        )
    A, b = form
    if f.dim is not None and f.dim != sys.dim:
        raise NoClosedFormError("observable dimension does not match the system")
    c = _exact_moments(A, b, f.terms, nmax)
    return CorrSeq.from_nonnegative(c, _provenance(sys, f, "exact", nmax))


# -- quadrature engine -----------------------------------------------------------


def _lag_states(sys: System, nodes, nmax):
    states = nodes
    for n in range(nmax + 1):
        if n:
            states = sys.iterate(nodes, n) if sys.has_closed_form else sys.step(states)
        yield n, states


def corr_quadrature_many(
    sys: System,
    observables,
    nmax: int,
    resolution: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> list[CorrSeq]:
    """Quadrature correlations of several observables sharing one pass over the lags.

    Pure characters go through the fused lag-sum kernel; the integrand
    e(xi . T^n s) conj(e(xi . s)) is computed as e(xi . (T^n s - s)).
    """
    observables = list(observables)
    nodes, weights = quadrature_nodes(sys, resolution, node_cap)
    chars = [i for i, f in enumerate(observables) if f.is_character]
    others = [i for i in range(len(observables)) if i not in set(chars)]
    freqs = np.array([observables[i].freq for i in chars], dtype=np.int64).reshape(
        len(chars), sys.dim
    )
    base = {i: weights * np.conj(observables[i](nodes)) for i in others}
    out = np.zeros((len(observables), nmax + 1), dtype=np.complex128)
    for n, states in _lag_states(sys, nodes, nmax):
        if chars:
            out[chars, n] = kernels.character_lag_sums(states - nodes, weights, freqs)
        for i in others:
            out[i, n] = np.sum(observables[i](states) * base[i])
    return [
        CorrSeq.from_nonnegative(
            out[i],
            _provenance(sys, f, "quadrature", nmax, resolution=int(resolution)),
        )
        for i, f in enumerate(observables)
    ]


def corr_quadrature(
    sys: System, f: Observable, nmax: int, resolution: int, node_cap: int = DEFAULT_NODE_CAP
) -> CorrSeq:
    return corr_quadrature_many(sys, [f], nmax, resolution, node_cap)[0]


def quadrature_at_lags(sys: System, f: Observable, lags, resolution: int) -> np.ndarray:
    """c(n) for an arbitrary list of lags n >= 0 (closed-form iterates required)."""
    nodes, weights = quadrature_nodes(sys, resolution)
    base = weights * np.conj(f(nodes))
    return np.array([np.sum(f(sys.iterate(nodes, int(n))) * base) for n in lags])


# -- Birkhoff engine --------------------------------------------------------------


def corr_birkhoff(
    sys: System,
    f: Observable,
    nmax: int,
    orbit_length: int,
    s0=None,
    seed: int | None = None,
) -> CorrSeq:
    """Lag products averaged over one orbit: c(n) = mean_{i<N'} f(s_{i+n}) conj f(s_i).

    N' = orbit_length - nmax is the same for every lag. With ``seed`` and no
    explicit ``s0`` the start point is drawn uniformly from the state cube.
    """
    if orbit_length < 10 * nmax:
        raise OrbitTooShortError(
            f"orbit length {orbit_length} < 10 * nmax = {10 * nmax}"
        )
    if s0 is None and seed is not None:
        s0 = np.random.default_rng(seed).random(sys.dim)
    start = as_start(sys, s0)
    values = f(sys.orbit_array(start, orbit_length))
    c = kernels.lag_correlation(values, nmax)
    prov = _provenance(
        sys,
        f,
        "birkhoff",
        nmax,
        orbit_length=int(orbit_length),
        s0=[float(v) for v in start],
        seed=seed,
    )
    return CorrSeq.from_nonnegative(c, prov)


# -- validation ------------------------------------------------------------------


@dataclass
class PSDReport:
    passed: bool
    min_eigenvalue: float
    threshold: float
    tol: float
    nmax: int

    def as_dict(self):
        return {
            "passed": self.passed,
            "min_eigenvalue": self.min_eigenvalue,
            "threshold": self.threshold,
            "tol": self.tol,
            "nmax": self.nmax,
        }


def toeplitz_matrix(c: CorrSeq) -> np.ndarray:
    col = c.nonnegative()
    return scipy.linalg.toeplitz(col, np.conj(col))


def validate_psd(c: CorrSeq, tol: float | None = None) -> PSDReport:
    """Smallest eigenvalue of [c(i - j)]; passes iff it is >= -tol * c(0).

    Without ``tol`` the documented tolerance of the producing engine is used.
    """
    if c.nmax > PSD_MAX_NMAX:
        raise ValueError(f"Toeplitz check is limited to nmax <= {PSD_MAX_NMAX}")
    if tol is None:
        tol = PSD_TOL.get(c.engine, 1e-8)
    lam = float(scipy.linalg.eigvalsh(toeplitz_matrix(c))[0])
    threshold = -tol * max(c.c0, 0.0)
    return PSDReport(lam >= threshold, lam, threshold, tol, c.nmax)


# -- conjugation by b_u -------------------------------------------------------------


@dataclass
class ShiftReport:
    u_z: float
    b_u: tuple[float, float, float]
    m: int
    max_deviation: float
    c_f: CorrSeq
    c_g: CorrSeq

    def as_dict(self):
        return {
            "u_z": self.u_z,
            "b_u": list(self.b_u),
            "m": self.m,
            "max_deviation": self.max_deviation,
        }


def conjugation_shift_check(
    sys: Heisenberg,
    f: Observable,
    u_z: float,
    nmax: int,
    engine: str = "quadrature",
    resolution: int = 64,
    orbit_length: int = 10**6,
) -> ShiftReport:
    """Compare the correlations of f and of g = lambda(b_u) f, with [a, b_u] = u.

    From a^n b_u = b_u a^n u^n one gets c_g(n) = e(m u_z)^n c_f(n) for f in V_m.
    """
    if not isinstance(sys, Heisenberg):
        raise TypeError("conjugation_shift_check needs a Heisenberg system")
    if f.tag != CENTER or not f.m:
        raise ValueError("observable must be tagged center_character(m) with m != 0")
    cfg: TranslationConfig = sys.cfg
    b = parry_solve(u_z, cfg)
    g = left_translate(f, b)
    if engine == "quadrature":
        c_f, c_g = corr_quadrature_many(sys, [f, g], nmax, resolution)
    elif engine == "birkhoff":
        c_f = corr_birkhoff(sys, f, nmax, orbit_length)
        c_g = corr_birkhoff(sys, g, nmax, orbit_length)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    n = c_f.lags
    predicted = np.exp(2j * np.pi * f.m * u_z * n) * c_f.values
    dev = float(np.max(np.abs(c_g.values - predicted)))
    return ShiftReport(float(u_z), tuple(b), int(f.m), dev, c_f, c_g)
