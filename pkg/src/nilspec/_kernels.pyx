# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror nilspec._kernels_py exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, ceil, exp, cos, sin, M_PI

cnp.import_array()

cdef inline double _frac(double t, double *k) nogil:
    cdef double kk = floor(t)
    cdef double f = t - kk
    if f >= 1.0:
        kk += 1.0
        f = 0.0
    k[0] = kk
    return f


def heis_orbit(double alpha, double beta, start, Py_ssize_t length):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((length, 3), dtype=np.float64)
    cdef double x = start[0], y = start[1], z = start[2]
    cdef double xs, ys, zs, kx, ky, kz
    cdef Py_ssize_t i
    if length == 0:
        return out
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    with nogil:
        for i in range(1, length):
            xs = x + alpha
            ys = y + beta
            zs = z + alpha * y
            x = _frac(xs, &kx)
            y = _frac(ys, &ky)
            z = _frac(zs - xs * ky, &kz)
            out[i, 0] = x
            out[i, 1] = y
            out[i, 2] = z
    return out


def heis_reduce(states):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.ascontiguousarray(states, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t n = g.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, 3), dtype=np.float64)
    cdef double kx, ky, kz
    with nogil:
        for i in range(n):
            out[i, 0] = _frac(g[i, 0], &kx)
            out[i, 1] = _frac(g[i, 1], &ky)
            out[i, 2] = _frac(g[i, 2] - g[i, 0] * ky, &kz)
    return out.reshape(np.shape(states))


def affine_orbit(A, b, start, Py_ssize_t length):
    """s_{i+1} = A s_i + b (mod 1) for an integer matrix A."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] M = np.ascontiguousarray(A, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t d = bb.shape[0], i, r, c
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((length, d), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cur = np.array(start, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt = np.empty(d, dtype=np.float64)
    cdef double acc, k
    if length == 0:
        return out
    for r in range(d):
        out[0, r] = cur[r]
    with nogil:
        for i in range(1, length):
            for r in range(d):
                acc = bb[r]
                for c in range(d):
                    if M[r, c] != 0:
                        acc = acc + M[r, c] * cur[c]
                nxt[r] = _frac(acc, &k)
            for r in range(d):
                cur[r] = nxt[r]
                out[i, r] = nxt[r]
    return out


def circle_cumsum(start, increments):
    """out[0] = start, out[i + 1] = out[i] + increments[i] (mod 1)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] inc = np.ascontiguousarray(increments, dtype=np.float64)
    cdef Py_ssize_t n = inc.shape[0], d = inc.shape[1], i, r
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n + 1, d), dtype=np.float64)
    cdef double k
    for r in range(d):
        out[0, r] = _frac(float(start[r]), &k)
    with nogil:
        for i in range(n):
            for r in range(d):
                out[i + 1, r] = _frac(out[i, r] + inc[i, r], &k)
    return out


def zak_eval(states, int m, double sigma, int J):
    """e(m z) * sum_{|y + j| <= J} h(y + j) e(m j x) with h(t) = exp(-t^2 / (2 sigma^2))."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.ascontiguousarray(states, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t n = g.shape[0], i, k, kmin, kmax
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_r = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_i = np.empty(n, dtype=np.float64)
    cdef double two_s2 = 2.0 * sigma * sigma
    cdef double rr = exp(-2.0 / two_s2)
    cdef double x, y, z, fl, fy, t0, h, ratio, ph, sr, si, pr, pi_, qr, qi, tmp
    cdef double tw = 2.0 * M_PI
    with nogil:
        for i in range(n):
            x = g[i, 0]
            y = g[i, 1]
            z = g[i, 2]
            fl = floor(y)
            fy = y - fl
            kmin = <Py_ssize_t>ceil(-J - fy)
            kmax = <Py_ssize_t>floor(J - fy)
            t0 = fy + kmin
            h = exp(-t0 * t0 / two_s2)
            ratio = exp(-(2.0 * t0 + 1.0) / two_s2)
            ph = tw * m * ((kmin - fl) * x)
            pr = cos(ph)
            pi_ = sin(ph)
            qr = cos(tw * m * x)
            qi = sin(tw * m * x)
            sr = 0.0
            si = 0.0
            for k in range(kmin, kmax + 1):
                sr = sr + h * pr
                si = si + h * pi_
                tmp = pr * qr - pi_ * qi
                pi_ = pr * qi + pi_ * qr
                pr = tmp
                h = h * ratio
                ratio = ratio * rr
            ph = tw * m * z
            qr = cos(ph)
            qi = sin(ph)
            out_r[i] = sr * qr - si * qi
            out_i[i] = sr * qi + si * qr
    return (out_r + 1j * out_i).reshape(np.shape(states)[:-1])


def lag_correlation(values, Py_ssize_t nmax):
    """c[n] = mean_{i < N - nmax} v[i + n] * conj(v[i]) for n = 0..nmax."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vr = np.ascontiguousarray(v.real)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vi = np.ascontiguousarray(v.imag)
    cdef Py_ssize_t N = v.shape[0] - nmax, n, i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_r = np.empty(nmax + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_i = np.empty(nmax + 1, dtype=np.float64)
    cdef double ar, ai, br, bi, sr, si
    with nogil:
        for n in range(nmax + 1):
            sr = 0.0
            si = 0.0
            for i in range(N):
                ar = vr[i + n]
                ai = vi[i + n]
                br = vr[i]
                bi = vi[i]
                sr = sr + ar * br + ai * bi
                si = si + ai * br - ar * bi
            out_r[n] = sr / N
            out_i[n] = si / N
    return out_r + 1j * out_i


def character_tables(delta, Py_ssize_t K):
    """tables[r, i, K + j] = e(j * delta[i, r]) for |j| <= K."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] D = np.ascontiguousarray(delta, dtype=np.float64)
    cdef Py_ssize_t n = D.shape[0], d = D.shape[1]
    cdef Py_ssize_t width = 2 * K + 1
    out = np.empty((d, n, width), dtype=np.complex128)
    # interleaved (re, im) view of the complex output
    cdef double[:, :, ::1] t = out.view(np.float64)
    cdef Py_ssize_t i, r, j
    cdef double er, ei, pr, pi_, tmp
    cdef double tw = 2.0 * M_PI
    with nogil:
        for r in range(d):
            for i in range(n):
                er = cos(tw * D[i, r])
                ei = sin(tw * D[i, r])
                t[r, i, 2 * K] = 1.0
                t[r, i, 2 * K + 1] = 0.0
                pr = 1.0
                pi_ = 0.0
                for j in range(1, K + 1):
                    tmp = pr * er - pi_ * ei
                    pi_ = pr * ei + pi_ * er
                    pr = tmp
                    t[r, i, 2 * (K + j)] = pr
                    t[r, i, 2 * (K + j) + 1] = pi_
                    t[r, i, 2 * (K - j)] = pr
                    t[r, i, 2 * (K - j) + 1] = -pi_
    return out
