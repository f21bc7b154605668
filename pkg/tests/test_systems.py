import math

import numpy as np
import pytest

from nilspec.errors import DimensionMismatchError, FactorConsistencyError, NodeCapExceededError
from nilspec.nilalgebra import HeisElement, TranslationConfig, heis_mul, heis_pow, reduce_mod_lattice
from nilspec.systems import (
    FactorCoordinate,
    FactorMap,
    Heisenberg,
    JoiningSpec,
    Rotation,
    Skew,
    TrigCocycle,
    Weyl,
    ZeroCocycle,
    build_joining,
    circle_distance,
    iterate,
    orbit,
    product,
    quadrature_nodes,
    step,
    wrap,
)

ALPHA = math.sqrt(2) - 1
H = Heisenberg()
SKEW = Skew(ALPHA, TrigCocycle(0.1, ((1, 0.5), (2, 0.25j))))

ALL_SYSTEMS = [
    Rotation((ALPHA,)),
    Rotation((ALPHA, math.sqrt(5) - 2)),
    Weyl((ALPHA,)),
    Weyl((ALPHA, 0.2360679774997898)),
    H,
    SKEW,
    product(Rotation((0.3,)), Weyl((ALPHA,))),
    build_joining(JoiningSpec(Weyl((ALPHA,)), (ALPHA,), FactorCoordinate(1)))[0],
]
IDS = ["rot1", "rot2", "weyl1", "weyl2", "heis", "skew", "prod", "joining"]


def test_step_examples():
    assert np.allclose(step(Weyl((0.3,)), [0.0, 0.0]), [0.3, 0.0])
    assert np.allclose(step(Rotation((0.5,)), [0.75]), [0.25])


def test_heisenberg_orbit_from_identity():
    cfg = TranslationConfig()
    s = np.zeros(3)
    for n in range(1, 40):
        s = H.step(s)
        a, b = cfg.alpha, cfg.beta
        ref, _ = reduce_mod_lattice((n * a, n * b, n * (n - 1) / 2 * a * b))
        assert np.max(circle_distance(s - np.asarray(ref))) < 1e-10


def test_heisenberg_iterate_seven():
    s = np.array([0.3, 0.6, 0.9])
    closed = iterate(H, s, 7)
    ref, _ = reduce_mod_lattice(heis_mul(heis_pow(H.cfg.element, 7), HeisElement(*s)))
    assert np.allclose(closed, ref, atol=1e-12)
    assert np.max(circle_distance(closed - iterate(H, s, 7, closed_form=False))) < 1e-12


def test_weyl_closed_form_example():
    u, v, k = 0.2, 0.7, 11
    ref = wrap([u + k * ALPHA, v + k * u + k * (k - 1) / 2 * ALPHA])
    assert np.allclose(iterate(Weyl((ALPHA,)), [u, v], k), ref, atol=1e-13)


@pytest.mark.parametrize("sys", ALL_SYSTEMS, ids=IDS)
def test_iterate_zero_is_identity(sys, rng):
    s = rng.random((5, sys.dim))
    assert np.array_equal(sys.iterate(s, 0), s)


@pytest.mark.parametrize("sys", ALL_SYSTEMS, ids=IDS)
def test_closed_form_matches_stepping(sys, rng):
    s = rng.random((64, sys.dim))
    cur = s
    worst = 0.0
    for n in range(1, 257):
        cur = sys.step(cur)
        if sys.has_closed_form and n % 8 == 0:
            worst = max(worst, float(np.max(circle_distance(sys.iterate(s, n) - cur))))
    assert worst <= 1e-9


@pytest.mark.parametrize("sys", ALL_SYSTEMS, ids=IDS)
def test_measure_preservation(sys):
    """20 random trigonometric polynomials of degree <= 3 integrate the same before and after T."""
    rng = np.random.default_rng(7)
    res = 64 if sys.dim <= 3 else 16
    nodes, w = quadrature_nodes(sys, res)
    image = sys.step(nodes)
    for _ in range(20):
        freqs = rng.integers(-3, 4, (4, sys.dim))
        coef = rng.normal(size=4) + 1j * rng.normal(size=4)

        def f(s):
            return np.exp(2j * np.pi * (s @ freqs.T)) @ coef

        assert abs(np.sum(w * f(image)) - np.sum(w * f(nodes))) <= 1e-10


@pytest.mark.parametrize("sys", ALL_SYSTEMS, ids=IDS)
def test_orbit_array_matches_steps(sys):
    s0 = sys.default_start()
    orb = sys.orbit_array(s0, 300)
    cur = s0
    for i in range(300):
        assert np.max(circle_distance(orb[i] - cur)) < 1e-9
        cur = sys.step(cur)


@pytest.mark.parametrize("sys", ALL_SYSTEMS, ids=IDS)
def test_orbit_determinism(sys):
    a = sys.orbit_array(sys.default_start(), 5000)
    b = sys.orbit_array(sys.default_start(), 5000)
    assert np.array_equal(a, b)
    assert np.all((a >= 0) & (a < 1))


def test_orbit_stream_chunks(monkeypatch):
    import nilspec.systems as systems

    monkeypatch.setattr(systems, "ORBIT_CHUNK", 100)
    R = Rotation((ALPHA,))
    streamed = np.array(list(orbit(R, [0.1], 1234)))
    assert streamed.shape == (1234, 1)
    assert np.max(circle_distance(streamed - R.orbit_array([0.1], 1234))) < 1e-12
    assert len(list(orbit(R, [0.1], 1))) == 1


def test_birkhoff_average_rotation():
    R = Rotation((ALPHA,))
    xs = R.orbit_array([0.0], 10**5)
    avg = abs(np.mean(np.exp(2j * np.pi * xs[:, 0])))
    # |sum_{n<N} e(n alpha)| / N = |sin(pi N alpha)| / (N |sin(pi alpha)|)
    oracle = abs(math.sin(math.pi * 10**5 * ALPHA)) / (10**5 * abs(math.sin(math.pi * ALPHA)))
    assert avg <= 1e-3
    assert abs(avg - oracle) < 1e-9


def test_constant_cocycle_skew_is_rotation():
    S = Skew(ALPHA, TrigCocycle(0.3))
    R = Rotation((ALPHA, 0.3))
    assert np.max(circle_distance(S.orbit_array([0.1, 0.2], 1000) - R.orbit_array([0.1, 0.2], 1000))) < 1e-12


def test_skew_birkhoff_sum_closed_form(rng):
    c = TrigCocycle(0.2, ((1, 0.5), (3, 0.1 - 0.2j)))
    x = rng.random(10)
    direct = sum(c(x + i * ALPHA) for i in range(40))
    assert np.allclose(c.birkhoff_sum(x, 40, ALPHA), direct, atol=1e-12)


def test_quadrature_nodes():
    nodes, w = quadrature_nodes(Rotation((ALPHA,)), 4)
    assert np.allclose(nodes[:, 0], [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(w, 0.25)
    nodes, w = quadrature_nodes(H, 8)
    assert nodes.shape == (512, 3) and np.all((nodes > 0) & (nodes < 1))
    assert abs(w.sum() - 1.0) < 1e-15
    nodes, w = quadrature_nodes(Rotation((ALPHA,)), 64)
    assert abs(np.sum(w * np.exp(2j * np.pi * nodes[:, 0]))) <= 1e-12
    with pytest.raises(NodeCapExceededError):
        quadrature_nodes(H, 1024)
    with pytest.raises(ValueError):
        quadrature_nodes(H, 1)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        H.step(np.zeros(2))
    with pytest.raises(DimensionMismatchError):
        Weyl((ALPHA,)).iterate(np.zeros(3), 2)


def test_joining_identity_on_grid():
    spec = JoiningSpec(Weyl((ALPHA,)), (ALPHA,), FactorCoordinate(1))
    Z, pi = build_joining(spec)
    nodes, _ = quadrature_nodes(Z, 32)
    dev = circle_distance(pi(Z.step(nodes)) - pi.target_step(pi(nodes)))
    assert dev.max() <= 1e-10
    # pi(x, 0) = x
    x = nodes[:, :2]
    assert np.allclose(pi(np.hstack([x, np.zeros((len(x), 1))])), x)


def test_trivial_joining():
    spec = JoiningSpec(Weyl((ALPHA,)), (0.0,), ZeroCocycle(1))
    Z, pi = build_joining(spec)
    nodes, _ = quadrature_nodes(Z, 16)
    lhs = pi(Z.step(nodes))
    rhs = pi(np.hstack([Weyl((ALPHA,)).step(nodes[:, :2]), nodes[:, 2:]]))
    assert np.max(circle_distance(lhs - rhs)) <= 1e-12


def test_joining_consistency_failure():
    spec = JoiningSpec(Weyl((ALPHA,)), (0.1,), FactorCoordinate(1))
    with pytest.raises(FactorConsistencyError) as exc:
        build_joining(spec)
    assert "max deviation" in str(exc.value)


def test_joining_orbit():
    spec = JoiningSpec(Weyl((ALPHA,)), (ALPHA,), FactorCoordinate(1))
    Z, _ = build_joining(spec)
    orb = Z.orbit_array([0.1, 0.2, 0.3], 200)
    cur = np.array([0.1, 0.2, 0.3])
    for p in orb:
        assert np.max(circle_distance(p - cur)) < 1e-10
        cur = Z.step(cur)
    assert isinstance(FactorMap(spec)(orb), np.ndarray)
