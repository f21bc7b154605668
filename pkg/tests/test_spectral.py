import math

import numpy as np
import pytest

from nilspec.correlation import CorrSeq, corr_exact
from nilspec.errors import GridTooCoarseError
from nilspec.observables import torus_character, trig_polynomial
from nilspec.spectral import (
    Thresholds,
    atom_mass,
    atom_mass_ladder,
    classify,
    convolve_measures,
    fejer_density,
    rotate_measure,
    rotation_average_flatness,
    wiener_atom_scan,
    wiener_ladder,
)
from nilspec.systems import Rotation, Weyl

ALPHA = math.sqrt(2) - 1
W = Weyl((ALPHA,))
R = Rotation((ALPHA,))

# Re (1/N) sum_{n=1}^{N} e(-n delta), delta = sqrt(2)/10, N = 256 (closed-form geometric sum)
OFF_PEAK_ORACLE = 0.002536901356416956


def atom_seq(theta, nmax=64, mass=1.0):
    return CorrSeq.from_nonnegative(mass * np.exp(2j * np.pi * theta * np.arange(nmax + 1)), {"engine": "exact"})


def delta_seq(nmax=64):
    return CorrSeq.from_nonnegative(np.r_[1.0, np.zeros(nmax)], {"engine": "exact"})


def fejer_kernel(theta, N):
    s = np.sin(np.pi * theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.sin(np.pi * N * theta) / s) ** 2 / N
    return np.where(np.abs(s) < 1e-15, N, out)


def test_fejer_examples():
    d = fejer_density(delta_seq(), 256)
    assert np.allclose(d.values, 1.0, atol=1e-14)
    c = atom_seq(0.25)
    d = fejer_density(c, 256)
    N = 65
    assert abs(d.values[64] - N) < 1e-9
    assert np.allclose(d.values, fejer_kernel(d.theta - 0.25, N), atol=1e-9)
    half = CorrSeq.from_nonnegative(np.r_[1.0, np.zeros(64)] * 0.5 + 0.5 * atom_seq(0.25).nonnegative())
    dh = fejer_density(half, 256)
    assert abs(dh.values[64] - (0.5 + N / 2)) < 1e-9


def test_fejer_real_and_errors():
    c = atom_seq(0.1234)
    d = fejer_density(c, 128)
    assert d.imag_max <= 1e-10
    assert d.min_value > -1e-10 and d.negative_count >= 0
    with pytest.raises(GridTooCoarseError):
        fejer_density(c, 100)
    with pytest.raises(ValueError):
        fejer_density(c, 256, order=70)
    assert abs(d.integral() - c.c0) < 1e-12


def test_wiener_examples():
    assert wiener_ladder(256) == [16, 32, 64, 128, 256]
    assert wiener_ladder(100) == [16, 32, 64, 100]
    w = wiener_atom_scan(atom_seq(0.3, 128))
    assert np.allclose(w.trace, 1.0)
    assert np.allclose(wiener_atom_scan(delta_seq(128)).trace, 0.0)
    w = wiener_atom_scan(atom_seq(0.3, 128, 0.5))
    assert np.allclose(w.trace, 0.25) and w.atomic_energy == pytest.approx(0.25)
    with pytest.raises(ValueError):
        wiener_atom_scan(delta_seq(8))


def test_atom_mass_examples():
    assert atom_mass(atom_seq(0.3), 0.3) == pytest.approx(1.0, abs=1e-12)
    c = atom_seq(0.3, 256)
    assert abs(atom_mass(c, 0.3 + math.sqrt(2) / 10) - OFF_PEAK_ORACLE) < 1e-12
    assert atom_mass(delta_seq(), 0.77) == 0.0
    ladder = atom_mass_ladder(c, 0.3)
    assert max(ladder) == 256 and all(abs(v - 1) < 1e-12 for v in ladder.values())


def test_rotate_examples():
    c = atom_seq(0.3)
    assert np.array_equal(rotate_measure(c, 0.0).values, c.values)
    back = rotate_measure(rotate_measure(c, 0.17), -0.17)
    assert np.max(np.abs(back.values - c.values)) < 1e-13
    theta = theta0 = 0.3
    rot = rotate_measure(c, theta0)
    assert abs(atom_mass(rot, theta + theta0) - atom_mass(c, theta)) < 1e-12
    assert rot.hermitian_defect() < 1e-15


def test_convolve_examples():
    c = convolve_measures(atom_seq(0.1), atom_seq(0.25))
    assert atom_mass(c, 0.35) == pytest.approx(1.0, abs=1e-12)
    other = atom_seq(0.42)
    assert np.array_equal(convolve_measures(delta_seq(), other).values, delta_seq().values)
    leb = corr_exact(W, torus_character((0, 1), W), 64)
    out = convolve_measures(leb, atom_seq(0.7))
    assert out.c0 == 1.0 and np.all(out.values[np.arange(129) != 64] == 0)
    with pytest.raises(ValueError):
        convolve_measures(atom_seq(0.1, 8), atom_seq(0.1, 9))


def test_flatness_examples():
    r = rotation_average_flatness(delta_seq(), ALPHA, 100)
    assert r.deviation < 1e-14
    c = atom_seq(0.3)
    r = rotation_average_flatness(c, ALPHA, 1000, 256)
    N = r.order
    assert r.deviation <= 0.05 * N
    # oracle: direct average of shifted Fejer kernels on the same grid
    theta = np.arange(256) / 256
    direct = np.mean([fejer_kernel(theta - 0.3 - j * ALPHA, N) for j in range(1000)], axis=0)
    assert abs(r.deviation - np.max(np.abs(direct - 1.0))) < 1e-9
    one = rotation_average_flatness(c, ALPHA, 1, 256)
    assert np.allclose(one.density.values, fejer_density(c, 256).values, atol=1e-12)
    with pytest.raises(ValueError):
        rotation_average_flatness(c, 0.5, 10)


def test_classify_rotation_discrete():
    c = corr_exact(R, torus_character((1,), R), 256)
    s = classify(c)
    assert s.label == "discrete"
    assert len(s.atoms) == 1
    theta, mass = s.atoms[0]
    assert abs(theta - ALPHA) < 1e-9 and abs(mass - 1) < 1e-6


def test_classify_weyl_continuous():
    s = classify(corr_exact(W, torus_character((0, 1), W), 256))
    assert s.label == "continuous" and s.atoms == []
    assert np.allclose(s.density.values, 1.0, atol=1e-12)


def test_classify_mixed():
    r2 = 1 / math.sqrt(2)
    f = trig_polynomial([((1, 0), r2), ((0, 1), r2)], W)
    s = classify(corr_exact(W, f, 256))
    assert s.label == "mixed"
    assert len(s.atoms) == 1
    assert abs(s.atoms[0][0] - ALPHA) < 1e-9 and abs(s.atoms[0][1] - 0.5) < 1e-6
    assert abs(s.diagnostics["continuous_mass"] - 0.5) < 1e-6


def test_classify_small_nmax_inconclusive():
    s = classify(atom_seq(0.3, 8))
    assert s.label == "inconclusive" and s.wiener is None


def test_classify_thresholds_recorded():
    th = Thresholds(atom_min_frac=0.1)
    s = classify(atom_seq(0.3, 32), th)
    assert s.to_dict()["thresholds"]["atom_min_frac"] == 0.1
    assert Thresholds.from_mapping({"atom_min_frac": "0.2", "bogus": 1}).atom_min_frac == 0.2


def test_classify_two_atoms():
    vals = 0.7 * np.exp(2j * np.pi * 0.1 * np.arange(129)) + 0.3 * np.exp(2j * np.pi * 0.6 * np.arange(129))
    s = classify(CorrSeq.from_nonnegative(vals, {"engine": "exact"}))
    assert s.label == "discrete"
    got = sorted((round(t, 6), round(m, 6)) for t, m in s.atoms)
    assert got == [(0.1, 0.7), (0.6, 0.3)]


@pytest.mark.parametrize("n", range(-4, 5))
def test_weyl_characters_all_continuous(n):
    for m in range(-4, 5):
        if m == 0:
            continue
        c = corr_exact(W, torus_character((n, m), W), 64)
        s = classify(c)
        assert s.label == "continuous"
        assert s.diagnostics["mass_residual"] <= 0.05 * c.c0
        assert s.density.imag_max <= 1e-10
