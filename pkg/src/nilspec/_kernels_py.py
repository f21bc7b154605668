"""Pure numpy / Python versions of the compiled kernels in _kernels.pyx.

Sequential orbit loops run in plain Python here, so they are slow for long
orbits; everything else is vectorised.
"""
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def heis_orbit(alpha, beta, start, length):
    out = np.empty((length, 3), dtype=np.float64)
    if length == 0:
        return out
    x, y, z = (float(c) for c in start)
    out[0] = (x, y, z)
    floor = math.floor
    for i in range(1, length):
        xs = x + alpha
        ys = y + beta
        zs = z + alpha * y
        kx = floor(xs)
        x = xs - kx
        if x >= 1.0:
            x = 0.0
        ky = floor(ys)
        y = ys - ky
        if y >= 1.0:
            ky += 1.0
            y = 0.0
        zz = zs - xs * ky
        z = zz - floor(zz)
        if z >= 1.0:
            z = 0.0
        out[i, 0] = x
        out[i, 1] = y
        out[i, 2] = z
    return out


def _floor_frac(t):
    k = np.floor(t)
    f = t - k
    wrap = f >= 1.0
    if np.any(wrap):
        k = np.where(wrap, k + 1.0, k)
        f = np.where(wrap, 0.0, f)
    return k, f


def heis_reduce(states):
    g = np.asarray(states, dtype=np.float64)
    _, x = _floor_frac(g[..., 0])
    ky, y = _floor_frac(g[..., 1])
    _, z = _floor_frac(g[..., 2] - g[..., 0] * ky)
    return np.stack([x, y, z], axis=-1)


def affine_orbit(A, b, start, length):
    M = np.asarray(A, dtype=np.int64)
    bb = [float(v) for v in b]
    d = len(bb)
    rows = [[(c, int(M[r, c])) for c in range(d) if M[r, c] != 0] for r in range(d)]
    out = np.empty((length, d), dtype=np.float64)
    if length == 0:
        return out
    cur = [float(v) for v in start]
    out[0] = cur
    floor = math.floor
    for i in range(1, length):
        nxt = []
        for r in range(d):
            acc = bb[r]
            for c, coef in rows[r]:
                acc = acc + coef * cur[c]
            f = acc - floor(acc)
            nxt.append(0.0 if f >= 1.0 else f)
        cur = nxt
        out[i] = cur
    return out


def circle_cumsum(start, increments):
    inc = np.asarray(increments, dtype=np.float64)
    n, d = inc.shape
    out = np.empty((n + 1, d), dtype=np.float64)
    out[0] = _floor_frac(np.asarray(start, dtype=np.float64))[1]
    floor = math.floor
    for r in range(d):
        cur = float(out[0, r])
        col = inc[:, r].tolist()
        res = out[:, r]
        for i, step in enumerate(col):
            t = cur + step
            cur = t - floor(t)
            if cur >= 1.0:
                cur = 0.0
            res[i + 1] = cur
    return out


def zak_eval(states, m, sigma, J):
    g = np.asarray(states, dtype=np.float64)
    x = g[..., 0]
    y = g[..., 1]
    z = g[..., 2]
    fl = np.floor(y)
    fy = y - fl
    kmin = np.ceil(-J - fy)
    kmax = np.floor(J - fy)
    two_s2 = 2.0 * sigma * sigma
    acc = np.zeros(x.shape, dtype=np.complex128)
    for off in range(2 * J + 2):
        k = kmin + off
        t = fy + k
        term = np.exp(-t * t / two_s2) * np.exp(1j * TWO_PI * m * ((k - fl) * x))
        acc += np.where(k <= kmax, term, 0.0)
    return acc * np.exp(1j * TWO_PI * m * z)


def lag_correlation(values, nmax):
    v = np.ascontiguousarray(values, dtype=np.complex128)
    N = v.shape[0] - nmax
    base = v[:N]
    return np.array([np.vdot(base, v[n:n + N]) / N for n in range(nmax + 1)])


def character_tables(delta, K):
    D = np.asarray(delta, dtype=np.float64)
    base = np.exp(1j * TWO_PI * D.T)
    pos = [np.ones_like(base)]
    for _ in range(K):
        pos.append(pos[-1] * base)
    cols = [np.conj(p) for p in pos[:0:-1]] + pos
    return np.stack(cols, axis=-1)
