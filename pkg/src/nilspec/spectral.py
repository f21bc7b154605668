"""From correlation sequences to spectral summaries.

Frequencies theta live in [0, 1) and stand for the point e(theta) of the
unit circle. A correlation sequence c is the moment sequence of a finite
measure sigma with c(n) = int e(n theta) d sigma(theta).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .correlation import CorrSeq, validate_psd
from .errors import GridTooCoarseError

WIENER_MIN_NMAX = 16


@dataclass
class Density:
    theta: np.ndarray
    values: np.ndarray
    order: int
    imag_max: float

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def negative_count(self) -> int:
        return int(np.count_nonzero(self.values < 0))

    def clipped(self) -> np.ndarray:
        return np.maximum(self.values, 0.0)

    def integral(self) -> float:
        return float(np.mean(self.values))


def _default_grid(nmax: int) -> int:
    return max(64, 1 << math.ceil(math.log2(max(4 * nmax, 2))))


def fejer_density(c: CorrSeq, grid_size: int | None = None, order: int | None = None) -> Density:
    """rho_N(theta) = sum_{|n|<N} (1 - |n|/N) c(n) e(-n theta) on theta_j = j / grid_size.

    N defaults to nmax + 1 so every available moment is used. Negative
    samples are kept and reported through ``negative_count``.
    """
    if grid_size is None:
        grid_size = _default_grid(c.nmax)
    if grid_size < 2 * c.nmax:
        raise GridTooCoarseError(f"grid of {grid_size} points is too coarse for nmax={c.nmax}")
    N = c.nmax + 1 if order is None else int(order)
    if not 1 <= N <= c.nmax + 1:
        raise ValueError(f"Fejer order must lie in [1, {c.nmax + 1}]")
    n = np.arange(-(N - 1), N)
    coeff = (1.0 - np.abs(n) / N) * c.values[c.nmax + n]
    # e(-n j / G) only depends on n mod G, so folding the coefficients is exact
    folded = np.zeros(grid_size, dtype=np.complex128)
    np.add.at(folded, n % grid_size, coeff)
    rho = np.fft.fft(folded)
    return Density(
        theta=np.arange(grid_size) / grid_size,
        values=rho.real.copy(),
        order=N,
        imag_max=float(np.max(np.abs(rho.imag))),
    )


@dataclass
class WienerScan:
    ladder: list[int]
    trace: list[float]

    @property
    def atomic_energy(self) -> float:
        """Estimate of sum over atoms of mass^2 (the last rung of the ladder)."""
        return self.trace[-1]

    def flatness(self) -> float:
        t = np.asarray(self.trace)
        top = float(t.max())
        return float((t.max() - t.min()) / top) if top > 0 else 0.0


def wiener_ladder(nmax: int) -> list[int]:
    ladder = []
    N = WIENER_MIN_NMAX
    while N <= nmax:
        ladder.append(N)
        N *= 2
    if ladder[-1] != nmax:
        ladder.append(nmax)
    return ladder


def wiener_atom_scan(c: CorrSeq) -> WienerScan:
    """W_N = (1/N) sum_{n=1}^{N} |c(n)|^2 on the dyadic ladder 16, 32, ..., nmax."""
    if c.nmax < WIENER_MIN_NMAX:
        raise ValueError(f"Wiener scan needs nmax >= {WIENER_MIN_NMAX}, got {c.nmax}")
    sq = np.abs(c.nonnegative()[1:]) ** 2
    csum = np.cumsum(sq)
    ladder = wiener_ladder(c.nmax)
    return WienerScan(ladder, [float(csum[N - 1] / N) for N in ladder])


def _twisted_average(c_pos: np.ndarray, theta, N: int):
    n = np.arange(1, N + 1)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return (np.exp(-2j * np.pi * np.outer(theta, n)) @ c_pos[1 : N + 1]) / N


def atom_mass(c: CorrSeq, theta: float, N: int | None = None) -> float:
    """(1/N) sum_{n=1}^{N} c(n) e(-n theta), which tends to sigma({e(theta)})."""
    N = c.nmax if N is None else int(N)
    if N < 1:
        raise ValueError("atom_mass needs at least one positive lag")
    return float(_twisted_average(c.nonnegative(), theta, N)[0].real)


def atom_mass_ladder(c: CorrSeq, theta: float) -> dict[int, float]:
    """The atom statistic at each rung of the dyadic ladder, a stability diagnostic."""
    rungs = [N for N in (1 << k for k in range(0, 20)) if N < c.nmax] + [c.nmax]
    return {N: atom_mass(c, theta, N) for N in rungs}


def rotate_measure(c: CorrSeq, theta0: float) -> CorrSeq:
    """Moments of the measure rotated by e(theta0): c'(n) = e(n theta0) c(n)."""
    phase = np.exp(2j * np.pi * theta0 * c.lags)
    prov = dict(c.provenance)
    prov["rotations"] = list(prov.get("rotations", [])) + [float(theta0)]
    return CorrSeq(c.nmax, phase * c.values, prov)


def convolve_measures(c1: CorrSeq, c2: CorrSeq) -> CorrSeq:
    """Moments of sigma_1 * sigma_2, i.e. the pointwise product of the sequences."""
    if c1.nmax != c2.nmax:
        raise ValueError(f"length mismatch: nmax {c1.nmax} vs {c2.nmax}")
    prov = {"convolution_of": [c1.provenance, c2.provenance], "engine": _common_engine(c1, c2)}
    # spelled out with separately rounded real products so that the result is
    # bit-for-bit symmetric in c1, c2 (fused complex multiplies are not)
    a, b = c1.values.real, c1.values.imag
    c, d = c2.values.real, c2.values.imag
    prod = np.empty_like(c1.values)
    prod.real = a * c - b * d
    prod.imag = a * d + b * c
    return CorrSeq(c1.nmax, prod, prov)


def _common_engine(c1, c2):
    engines = {c1.engine, c2.engine}
    return engines.pop() if len(engines) == 1 else "mixed"


@dataclass
class FlatnessReport:
    deviation: float
    order: int
    count: int
    alpha: float
    density: Density

    def as_dict(self):
        return {"deviation": self.deviation, "order": self.order, "count": self.count, "alpha": self.alpha}


def rotation_average_flatness(
    c: CorrSeq, alpha: float, count: int, grid_size: int | None = None
) -> FlatnessReport:
    """Average the Fejer densities of c rotated by j alpha, j < count.

    The averaged measure approaches a rotation-invariant one, i.e. c(0) times
    Lebesgue; the report carries sup |average - c(0)|. Averaging is done on
    the moments, which is the same by linearity of the Fejer transform.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if float(alpha * 2**20).is_integer():
        raise ValueError("alpha must not be a dyadic rational with small denominator")
    n = c.lags
    j = np.arange(count)
    mean_phase = np.exp(2j * np.pi * alpha * np.outer(n, j)).mean(axis=1)
    averaged = CorrSeq(c.nmax, c.values * mean_phase, dict(c.provenance))
    dens = fejer_density(averaged, grid_size)
    return FlatnessReport(
        deviation=float(np.max(np.abs(dens.values - c.c0))),
        order=dens.order,
        count=int(count),
        alpha=float(alpha),
        density=dens,
    )


# -- classification ---------------------------------------------------------------


@dataclass
class Thresholds:
    atom_min_frac: float = 0.02
    discrete_flatness: float = 0.05
    discrete_atom_frac: float = 0.95
    continuous_wiener_frac: float = 0.05
    mixed_min_frac: float = 0.05
    max_atoms: int = 32

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_mapping(cls, mapping) -> "Thresholds":
        known = {k: type(v) for k, v in asdict(cls()).items()}
        return cls(**{k: known[k](v) for k, v in mapping.items() if k in known})


@dataclass
class SpectralSummary:
    atoms: list[tuple[float, float]]
    density: Density
    wiener: WienerScan | None
    label: str
    thresholds: Thresholds
    diagnostics: dict = field(default_factory=dict)

    @property
    def atomic_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "atoms": [{"theta": t, "mass": m} for t, m in self.atoms],
            "wiener": None
            if self.wiener is None
            else {"ladder": self.wiener.ladder, "trace": self.wiener.trace},
            "thresholds": self.thresholds.as_dict(),
            "diagnostics": self.diagnostics,
        }


def _refine_peak(stat, grid, j):
    G = len(grid)
    a, b, cc = (j - 1) / G, j / G, (j + 1) / G
    try:
        res = minimize_scalar(lambda t: -stat(t), bracket=(a, b, cc), method="golden", tol=1e-10)
    except ValueError:
        return b
    return float(res.x) if -res.fun >= stat(b) else b


def find_atoms(c: CorrSeq, thresholds: Thresholds, grid_size: int | None = None):
    """Greedy atom extraction: locate the largest atom statistic, refine, subtract, repeat.

    Returns the atoms and the residual moment sequence with the extracted
    atoms removed.
    """
    G = grid_size or _default_grid(c.nmax)
    N = c.nmax
    residual = np.array(c.nonnegative(), copy=True)
    floor = thresholds.atom_min_frac * max(c.c0, 0.0)
    grid = np.arange(G) / G
    atoms = []
    n_all = np.arange(N + 1)
    for _ in range(thresholds.max_atoms):
        # (1/N) sum_{n=1}^N r(n) e(-n j / G) for all j at once
        folded = np.zeros(G, dtype=np.complex128)
        np.add.at(folded, n_all[1:] % G, residual[1:])
        stat_grid = np.fft.fft(folded).real / N
        j = int(np.argmax(stat_grid))
        if stat_grid[j] < floor or floor <= 0:
            break

        def stat(t, r=residual):
            return float(_twisted_average(r, t, N)[0].real)

        theta = _refine_peak(stat, grid, j)
        mass = stat(theta)
        if mass < floor:
            break
        theta = theta % 1.0
        atoms.append((theta, mass))
        residual = residual - mass * np.exp(2j * np.pi * theta * n_all)
    return atoms, CorrSeq.from_nonnegative(residual, dict(c.provenance))


def classify(
    c: CorrSeq, thresholds: Thresholds | None = None, grid_size: int | None = None
) -> SpectralSummary:
    """Label the spectral measure discrete / continuous / mixed / inconclusive.

    * discrete: Wiener trace flat within ``discrete_flatness`` and atoms carry
      at least ``discrete_atom_frac`` of c(0);
    * continuous: W_nmax <= ``continuous_wiener_frac`` c(0)^2 and no atom
      reaches ``atom_min_frac`` c(0);
    * mixed: both atomic and continuous mass at least ``mixed_min_frac`` c(0).

    Singular continuous mass cannot be told apart from absolutely continuous
    mass with finitely many moments and is counted as continuous.
    """
    th = thresholds or Thresholds()
    c0 = c.c0
    psd = validate_psd(c) if c.nmax <= 512 else None
    atoms, residual = find_atoms(c, th, grid_size)
    density = fejer_density(residual, grid_size)
    atomic = float(sum(m for _, m in atoms))
    continuous = residual.c0
    diagnostics = {
        "c0": c0,
        "nmax": c.nmax,
        "atomic_mass": atomic,
        "continuous_mass": continuous,
        "mass_residual": abs(atomic + density.integral() - c0),
        "density_min": density.min_value,
        "density_negative_count": density.negative_count,
        "density_imag_max": density.imag_max,
        "psd": None if psd is None else psd.as_dict(),
        "notes": [],
    }
    wiener = None
    label = "inconclusive"
    if c.nmax < WIENER_MIN_NMAX:
        diagnostics["notes"].append(f"nmax < {WIENER_MIN_NMAX}: Wiener scan unavailable")
    elif c0 <= 0:
        diagnostics["notes"].append("c(0) = 0: the zero measure")
    else:
        wiener = wiener_atom_scan(c)
        flat = wiener.flatness()
        diagnostics["wiener_flatness"] = flat
        big_atom = any(m >= th.atom_min_frac * c0 for _, m in atoms)
        if flat <= th.discrete_flatness and atomic >= th.discrete_atom_frac * c0:
            label = "discrete"
        elif wiener.atomic_energy <= th.continuous_wiener_frac * c0**2 and not big_atom:
            label = "continuous"
        elif atomic >= th.mixed_min_frac * c0 and continuous >= th.mixed_min_frac * c0:
            label = "mixed"
    return SpectralSummary(atoms, density, wiener, label, th, diagnostics)
