import math

import numpy as np
import pytest

from nilspec import _kernels_py, kernels
from nilspec.nilalgebra import HeisElement, heis_mul, reduce_mod_lattice

ALPHA, BETA = math.sqrt(2) - 1, math.sqrt(3) - 1


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()
    assert kernels.get_backend("python") is _kernels_py
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_heis_orbit_matches_scalar_steps(backend):
    orb = backend.heis_orbit(ALPHA, BETA, [0.1, 0.2, 0.3], 500)
    g = HeisElement(0.1, 0.2, 0.3)
    a = HeisElement(ALPHA, BETA, 0.0)
    for i in range(500):
        assert np.allclose(orb[i], g, atol=1e-9, rtol=0)
        g, _ = reduce_mod_lattice(heis_mul(a, g))


def test_orbits_agree_bitwise():
    py, cy = kernels.get_backend("python"), kernels.get_backend()
    assert np.array_equal(py.heis_orbit(ALPHA, BETA, [0.1] * 3, 2000), cy.heis_orbit(ALPHA, BETA, [0.1] * 3, 2000))
    A = np.array([[1, 0], [1, 1]])
    b = np.array([ALPHA, 0.0])
    assert np.array_equal(py.affine_orbit(A, b, [0.1, 0.1], 2000), cy.affine_orbit(A, b, [0.1, 0.1], 2000))


def test_heis_reduce(backend, rng):
    pts = rng.random((1000, 3)) * 10 - 5
    red = backend.heis_reduce(pts)
    assert np.all((red >= 0) & (red < 1))
    assert np.array_equal(backend.heis_reduce(red), red)
    for p, r in zip(pts[:50], red[:50]):
        assert tuple(r) == tuple(reduce_mod_lattice(HeisElement(*p))[0])


def test_circle_cumsum(backend, rng):
    inc = rng.random((100, 2))
    out = backend.circle_cumsum([0.5, 0.25], inc)
    assert out.shape == (101, 2)
    ref = (np.array([0.5, 0.25]) + np.vstack([np.zeros(2), np.cumsum(inc, axis=0)])) % 1.0
    assert np.allclose(out, ref, atol=1e-12)


def test_zak_eval_parity(rng):
    pts = rng.random((2000, 3)) * 3 - 1
    ref = _kernels_py.zak_eval(pts, 2, 0.8, 6)
    assert np.max(np.abs(kernels.zak_eval(pts, 2, 0.8, 6) - ref)) < 1e-12


def test_zak_eval_direct_formula(backend, rng):
    # f = e(mz) sum_{|y+j|<=J} h(y+j) e(mjx), evaluated term by term
    pts = rng.random((50, 3)) * 2 - 0.5
    m, sigma, J = 1, 1.0, 6
    out = backend.zak_eval(pts, m, sigma, J)
    for (x, y, z), v in zip(pts, out):
        tot = sum(
            math.exp(-(y + j) ** 2 / (2 * sigma**2)) * np.exp(2j * np.pi * m * j * x)
            for j in range(-20, 21)
            if abs(y + j) <= J
        )
        assert abs(v - tot * np.exp(2j * np.pi * m * z)) < 1e-12


def test_lag_correlation(backend, rng):
    v = np.exp(2j * np.pi * rng.random(400))
    out = backend.lag_correlation(v, 10)
    N = 390
    for n in range(11):
        assert abs(out[n] - np.sum(v[n:n + N] * np.conj(v[:N])) / N) < 1e-14


def test_character_tables(backend, rng):
    D = rng.random((30, 2))
    t = backend.character_tables(D, 3)
    assert t.shape == (2, 30, 7)
    for j in range(-3, 4):
        assert np.allclose(t[:, :, 3 + j], np.exp(2j * np.pi * j * D.T), atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_character_lag_sums(d, rng):
    D = rng.random((5000, d))
    w = rng.random(5000) / 5000
    F = rng.integers(-4, 5, (25, d))
    ref = np.array([np.sum(w * np.exp(2j * np.pi * (D @ f))) for f in F])
    for name in kernels.available_backends():
        out = kernels.character_lag_sums(D, w, F, backend=name)
        assert np.max(np.abs(out - ref)) < 1e-13


def test_character_lag_sums_chunking(rng, monkeypatch):
    D = rng.random((1000, 2))
    w = np.full(1000, 1e-3)
    F = np.array([[1, 2], [0, -1]])
    full = kernels.character_lag_sums(D, w, F)
    monkeypatch.setattr(kernels, "TABLE_CHUNK", 77)
    assert np.max(np.abs(kernels.character_lag_sums(D, w, F) - full)) < 1e-15
