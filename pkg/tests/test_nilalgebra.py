import math

import numpy as np
import pytest

from nilspec.errors import DegenerateConfigurationError
from nilspec.nilalgebra import (
    IDENTITY,
    HeisElement,
    LatticePoint,
    TranslationConfig,
    heis_commutator,
    heis_commutator_composed,
    heis_inv,
    heis_mul,
    heis_pow,
    heis_pow_closed,
    mul_arrays,
    parry_solve,
    reduce_arrays,
    reduce_mod_lattice,
)

CFG = TranslationConfig()
A = CFG.element


def close(g, h, tol=1e-12):
    return max(abs(a - b) for a, b in zip(g, h)) <= tol


def test_defaults():
    assert CFG.alpha == math.sqrt(2) - 1
    assert CFG.beta == math.sqrt(3) - 1
    assert A == HeisElement(CFG.alpha, CFG.beta, 0.0)


def test_mul_examples():
    g = HeisElement(0.3, -1.2, 4.0)
    assert heis_mul(IDENTITY, g) == g
    assert heis_mul(HeisElement(0.5, 0, 0), HeisElement(0, 0.5, 0)) == HeisElement(0.5, 0.5, 0.25)
    assert close(heis_mul(g, heis_inv(g)), IDENTITY)


def test_inverse_formula():
    g = HeisElement(2.0, 3.0, 5.0)
    assert heis_inv(g) == HeisElement(-2.0, -3.0, -5.0 + 6.0)


def test_pow_examples():
    a, b = CFG.alpha, CFG.beta
    assert close(heis_pow(A, 3), (3 * a, 3 * b, 3 * a * b))
    g = HeisElement(0.7, -0.2, 1.1)
    assert heis_pow(g, 0) == IDENTITY
    assert close(heis_pow(g, -1), heis_inv(g))


@pytest.mark.parametrize("n", list(range(-64, 65)))
def test_pow_matches_repeated_product(n):
    g = HeisElement(0.37, -0.81, 0.5)
    acc = IDENTITY
    step = g if n >= 0 else heis_inv(g)
    for _ in range(abs(n)):
        acc = heis_mul(acc, step)
    assert close(heis_pow(g, n), acc, 1e-10)
    assert close(heis_pow_closed(g, n), acc, 1e-10)


def test_commutator_examples():
    x, y, z = 0.3, -0.7, 2.0
    c = heis_commutator(A, HeisElement(x, y, z))
    assert c[:2] == (0.0, 0.0)
    assert abs(c[2] - (CFG.alpha * y - CFG.beta * x)) <= 1e-15
    assert close(c, heis_commutator_composed(A, HeisElement(x, y, z)))
    g = HeisElement(1.5, 2.5, -3.0)
    assert heis_commutator(g, g) == IDENTITY


def test_reduce_examples():
    g, gamma = reduce_mod_lattice(HeisElement(0.25, 0.5, 0.55))
    assert g == HeisElement(0.25, 0.5, 0.55) and gamma == LatticePoint(0, 0, 0)
    src = HeisElement(1.25, -0.5, 2.3)
    g, gamma = reduce_mod_lattice(src)
    assert gamma == LatticePoint(-1, 1, -3)
    assert close(g, (0.25, 0.5, 0.55), 1e-12)
    assert close(heis_mul(src, gamma.as_element()), g, 0.0)


def test_reduce_is_coset_invariant(rng):
    for _ in range(200):
        g = HeisElement(*(rng.random(3) * 8 - 4))
        lat = LatticePoint(*(int(v) for v in rng.integers(-5, 6, 3)))
        r1, _ = reduce_mod_lattice(g)
        r2, _ = reduce_mod_lattice(heis_mul(g, lat.as_element()))
        d = np.abs(np.subtract(r1, r2))
        assert np.all(np.minimum(d, 1 - d) < 1e-9)


def test_reduce_half_open_boundary():
    # a fractional part that rounds up to 1.0 wraps to 0
    g, gamma = reduce_mod_lattice(HeisElement(-1e-18, 0.0, 0.0))
    assert 0.0 <= g.x < 1.0


def test_reduce_arrays_matches_scalar(rng):
    pts = rng.random((500, 3)) * 20 - 10
    red, gam = reduce_arrays(pts)
    for p, r, q in zip(pts, red, gam):
        rs, qs = reduce_mod_lattice(HeisElement(*p))
        assert tuple(r) == tuple(rs)
        assert tuple(int(v) for v in q) == tuple(qs)


def test_mul_arrays_matches_scalar(rng):
    g, h = rng.random((2, 50, 3)) * 4 - 2
    out = mul_arrays(g, h)
    for a, b, c in zip(g, h, out):
        assert tuple(c) == tuple(heis_mul(HeisElement(*a), HeisElement(*b)))


def test_parry_examples():
    assert parry_solve(0.0, CFG) == HeisElement(0.0, 0.0, 0.0)
    a, b = CFG.alpha, CFG.beta
    bu = parry_solve(a, CFG)
    assert close(heis_commutator(A, bu), (0, 0, a))
    bu = parry_solve(1.0, CFG)
    n2 = a * a + b * b
    assert close(bu, (-b / n2, a / n2, 0.0), 1e-15)
    assert close(heis_commutator(A, bu), (0, 0, 1.0))


@pytest.mark.parametrize("uz", [-100.0, -3.3, 0.1, 0.25, 0.7, 42.0, 100.0])
def test_parry_recovers(uz):
    assert close(heis_commutator(A, parry_solve(uz, CFG)), (0, 0, uz), 1e-12)


def test_parry_degenerate():
    with pytest.raises(DegenerateConfigurationError):
        parry_solve(0.5, TranslationConfig(0.0, 0.0))


def test_parry_minimal_norm():
    bu = parry_solve(0.3, CFG)
    # the least-norm solution is orthogonal to the solution line's direction (alpha, beta)
    assert abs(bu.x * CFG.alpha + bu.y * CFG.beta) < 1e-15
    assert bu.z == 0.0


def test_associativity_random(rng):
    for _ in range(1000):
        g, h, k = (HeisElement(*(rng.random(3) * 20 - 10)) for _ in range(3))
        assert close(heis_mul(heis_mul(g, h), k), heis_mul(g, heis_mul(h, k)), 1e-12)
