"""Arithmetic in the continuous 3-dimensional Heisenberg group.

Elements are written in coordinates (x, y, z) with the twisted product

    (x, y, z) * (x', y', z') = (x + x', y + y', z + z' + x * y'),

i.e. the upper unitriangular matrices [[1, x, z], [0, 1, y], [0, 0, 1]].
The integer points form the lattice Gamma, and [0, 1)^3 is used as a
fundamental domain for G/Gamma, reached by right multiplication with
lattice elements.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateConfigurationError


class HeisElement(NamedTuple):
    x: float
    y: float
    z: float


class LatticePoint(NamedTuple):
    p: int
    q: int
    r: int

    def as_element(self) -> HeisElement:
        return HeisElement(float(self.p), float(self.q), float(self.r))


class TranslationConfig(NamedTuple):
    """Translation element a = (alpha, beta, 0).

    1, alpha and beta are meant to be rationally independent so that the
    nilsystem is ergodic; that cannot be checked in floating point and is
    left to the caller.
    """

    alpha: float = math.sqrt(2.0) - 1.0
    beta: float = math.sqrt(3.0) - 1.0

    @property
    def element(self) -> HeisElement:
        return HeisElement(self.alpha, self.beta, 0.0)


IDENTITY = HeisElement(0.0, 0.0, 0.0)


def _as_element(g) -> HeisElement:
    if isinstance(g, HeisElement):
        return g
    x, y, z = g
    return HeisElement(float(x), float(y), float(z))


def heis_mul(g, h) -> HeisElement:
    g = _as_element(g)
    h = _as_element(h)
    return HeisElement(g.x + h.x, g.y + h.y, g.z + h.z + g.x * h.y)


def heis_inv(g) -> HeisElement:
    g = _as_element(g)
    return HeisElement(-g.x, -g.y, -g.z + g.x * g.y)


def heis_pow(g, n: int) -> HeisElement:
    """n-th power by square-and-multiply; negative n goes through the inverse."""
    g = _as_element(g)
    n = int(n)
    if n < 0:
        g, n = heis_inv(g), -n
    result = IDENTITY
    base = g
    while n:
        if n & 1:
            result = heis_mul(result, base)
        base = heis_mul(base, base)
        n >>= 1
    return result


def heis_pow_closed(g, n: int) -> HeisElement:
    """Closed form g^n = (n x, n y, n z + C(n, 2) x y), valid for all integers n."""
    g = _as_element(g)
    n = int(n)
    return HeisElement(n * g.x, n * g.y, n * g.z + (n * (n - 1) // 2) * (g.x * g.y))


def heis_commutator(g, h) -> HeisElement:
    """[g, h] = g^-1 h^-1 g h, which is central: (0, 0, x y' - y x')."""
    g = _as_element(g)
    h = _as_element(h)
    return HeisElement(0.0, 0.0, g.x * h.y - g.y * h.x)


def heis_commutator_composed(g, h) -> HeisElement:
    """The commutator evaluated literally as a product of four elements."""
    return heis_mul(heis_mul(heis_inv(g), heis_inv(h)), heis_mul(g, h))


def _floor_frac(t: float) -> tuple[int, float]:
    k = math.floor(t)
    frac = t - k
    if frac >= 1.0:  # t = -tiny rounds to 1.0 after the shift
        k += 1
        frac = 0.0
    return k, frac


def reduce_mod_lattice(g) -> tuple[HeisElement, LatticePoint]:
    """Return (g_hat, gamma) with g_hat = g * gamma in [0, 1)^3 and gamma integral.

    The x coordinate is reduced first, then y, then z; the z correction
    picks up the cross term x * q from right multiplication by (p, q, r).
    """
    g = _as_element(g)
    kx, x = _floor_frac(g.x)
    ky, y = _floor_frac(g.y)
    q = -ky
    kz, z = _floor_frac(g.z + g.x * q)
    return HeisElement(x, y, z), LatticePoint(-kx, q, -kz)


def parry_solve(u_z: float, cfg: TranslationConfig) -> HeisElement:
    """Least-norm b = (x, y, 0) with [a, b] = (0, 0, u_z) for a = (alpha, beta, 0)."""
    alpha, beta = float(cfg.alpha), float(cfg.beta)
    norm2 = alpha * alpha + beta * beta
    if norm2 == 0.0:
        raise DegenerateConfigurationError(
            "alpha = beta = 0: the commutator map b -> [a, b] is identically trivial"
        )
    s = float(u_z) / norm2
    return HeisElement(-beta * s, alpha * s, 0.0)


# -- vectorised forms on arrays of shape (..., 3) ---------------------------


def mul_arrays(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    out = g + h
    out[..., 2] += g[..., 0] * h[..., 1]
    return out


def inv_arrays(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    out = -g
    out[..., 2] += g[..., 0] * g[..., 1]
    return out


def _floor_frac_arrays(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = np.floor(t)
    frac = t - k
    wrap = frac >= 1.0
    if np.any(wrap):
        k = np.where(wrap, k + 1.0, k)
        frac = np.where(wrap, 0.0, frac)
    return k, frac


def reduce_arrays(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Array version of reduce_mod_lattice; returns (reduced, integer lattice shifts)."""
    g = np.asarray(g, dtype=float)
    kx, x = _floor_frac_arrays(g[..., 0])
    ky, y = _floor_frac_arrays(g[..., 1])
    kz, z = _floor_frac_arrays(g[..., 2] - g[..., 0] * ky)
    gamma = np.stack([-kx, -ky, -kz], axis=-1).astype(np.int64)
    return np.stack([x, y, z], axis=-1), gamma
