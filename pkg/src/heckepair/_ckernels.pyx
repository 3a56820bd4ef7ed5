# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, fabs, floor, M_PI
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double SMALL_DEN = 1e-4


cdef inline double _reduce(double t) noexcept nogil:
    return t - floor(t + 0.5)


cdef inline double _fejer_direct(double t, double scale) noexcept nogil:
    cdef double r = _reduce(t)
    cdef double s = sin(M_PI * r)
    if s == 0.0:
        return 1.0
    cdef double q = sin(M_PI * scale * r) / (scale * s)
    return q * q


cdef inline double _dirichlet_direct(double r, double scale) noexcept nogil:
    cdef double s = sin(M_PI * r)
    if s == 0.0:
        return 2.0 * scale + 1.0
    return sin((2.0 * scale + 1.0) * M_PI * r) / s


cdef inline double _raised_direct(double t, double scale) noexcept nogil:
    cdef double d = 0.5 / scale
    return (_dirichlet_direct(_reduce(t), scale)
            + 0.5 * _dirichlet_direct(_reduce(t + d), scale)
            + 0.5 * _dirichlet_direct(_reduce(t - d), scale)) / (2.0 * scale)


def fejer_periodized(int scale, double theta):
    return _fejer_direct(theta, scale)


def raised_cosine_periodized(int scale, double theta):
    return _raised_direct(theta, scale)


cdef double _pair_fejer(const double[::1] w, const double[::1] th, double M) noexcept nogil:
    cdef Py_ssize_t n = th.shape[0], i, j
    cdef double total = 0.0, row, g
    cdef double sMi, cMi, s1i, c1i, num, den
    cdef double *sM
    cdef double *cM
    cdef double *s1
    cdef double *c1
    sM = <double *> malloc(n * sizeof(double))
    cM = <double *> malloc(n * sizeof(double))
    s1 = <double *> malloc(n * sizeof(double))
    c1 = <double *> malloc(n * sizeof(double))
    for i in range(n):
        sM[i] = sin(M_PI * M * th[i])
        cM[i] = cos(M_PI * M * th[i])
        s1[i] = sin(M_PI * th[i])
        c1[i] = cos(M_PI * th[i])
    for i in range(n):
        sMi = sM[i]; cMi = cM[i]; s1i = s1[i]; c1i = c1[i]
        row = 0.0
        for j in range(i + 1, n):
            # sum of angles
            den = s1i * c1[j] + c1i * s1[j]
            if fabs(den) < SMALL_DEN:
                g = _fejer_direct(th[i] + th[j], M)
            else:
                num = (sMi * cM[j] + cMi * sM[j]) / (M * den)
                g = num * num
            # difference of angles
            den = s1i * c1[j] - c1i * s1[j]
            if fabs(den) < SMALL_DEN:
                g = g + _fejer_direct(th[i] - th[j], M)
            else:
                num = (sMi * cM[j] - cMi * sM[j]) / (M * den)
                g = g + num * num
            row = row + w[j] * g
        total = total + w[i] * row
    free(sM); free(cM); free(s1); free(c1)
    return 2.0 * total


cdef inline double _dk(double sa, double ca, double sb, double cb,
                       double sph, double cph, double sbe, double cbe,
                       double sign, double t, double scale, int *bad) noexcept nogil:
    # Dirichlet kernel at (angle) + sign*shift from rotated sin/cos pairs
    cdef double num = sa * cph + sign * ca * sph
    cdef double den = sb * cbe + sign * cb * sbe
    if fabs(den) < SMALL_DEN:
        bad[0] = 1
        return 0.0
    return num / den


cdef double _pair_raised(const double[::1] w, const double[::1] th, double M) noexcept nogil:
    cdef Py_ssize_t n = th.shape[0], i, j
    cdef double total = 0.0, row, g, t
    cdef double K = 2.0 * M + 1.0
    cdef double delta = 0.5 / M
    cdef double sph = sin(K * M_PI * delta), cph = cos(K * M_PI * delta)
    cdef double sbe = sin(M_PI * delta), cbe = cos(M_PI * delta)
    cdef double sa, ca, sb, cb, v
    cdef int bad, k
    cdef double sgn
    cdef double *sK
    cdef double *cK
    cdef double *s1
    cdef double *c1
    sK = <double *> malloc(n * sizeof(double))
    cK = <double *> malloc(n * sizeof(double))
    s1 = <double *> malloc(n * sizeof(double))
    c1 = <double *> malloc(n * sizeof(double))
    for i in range(n):
        sK[i] = sin(M_PI * K * th[i])
        cK[i] = cos(M_PI * K * th[i])
        s1[i] = sin(M_PI * th[i])
        c1[i] = cos(M_PI * th[i])
    for i in range(n):
        row = 0.0
        for j in range(i + 1, n):
            g = 0.0
            for k in range(2):
                sgn = 1.0 if k == 0 else -1.0
                t = th[i] + sgn * th[j]
                sa = sK[i] * cK[j] + sgn * cK[i] * sK[j]
                ca = cK[i] * cK[j] - sgn * sK[i] * sK[j]
                sb = s1[i] * c1[j] + sgn * c1[i] * s1[j]
                cb = c1[i] * c1[j] - sgn * s1[i] * s1[j]
                bad = 0
                v = _dk(sa, ca, sb, cb, 0.0, 1.0, 0.0, 1.0, 1.0, t, M, &bad)
                v = v + 0.5 * _dk(sa, ca, sb, cb, sph, cph, sbe, cbe, 1.0, t, M, &bad)
                v = v + 0.5 * _dk(sa, ca, sb, cb, sph, cph, sbe, cbe, -1.0, t, M, &bad)
                if bad:
                    g = g + _raised_direct(t, M)
                else:
                    g = g + v / (2.0 * M)
            row = row + w[j] * g
        total = total + w[i] * row
    free(sK); free(cK); free(s1); free(c1)
    return 2.0 * total


def smooth_pair_sum(w, theta, int scale, int kind):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double out
    if kind == 0:
        with nogil:
            out = _pair_fejer(wv, tv, <double> scale)
    elif kind == 1:
        with nogil:
            out = _pair_raised(wv, tv, <double> scale)
    else:
        raise ValueError(f"unknown closed-form kind {kind}")
    return out


def series_sums(t1, theta, int nmax):
    cdef const double[::1] tv = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(t1, dtype=np.float64)
    S_arr = np.zeros(nmax + 1)
    Q_arr = np.zeros(nmax + 1)
    cdef double[::1] S = S_arr
    cdef double[::1] Q = Q_arr
    cdef Py_ssize_t n = tv.shape[0], p, k
    cdef double x, a_even, a_odd, a_next, v, wp
    with nogil:
        for p in range(n):
            wp = wv[p]
            x = 2.0 * cos(M_PI * tv[p])
            a_even = 1.0
            a_odd = 0.0
            for k in range(1, nmax + 1):
                a_odd = x * a_even - a_odd
                a_next = x * a_odd - a_even
                v = wp * (a_next - a_even)
                S[k] += v
                Q[k] += v * v
                a_even = a_next
    return S_arr, Q_arr


def hurwitz12_table(long max_n):
    out_arr = np.zeros(max_n + 1, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef long a, b, c, c_max, m
    out[0] = -1
    with nogil:
        a = 1
        while 3 * a * a <= max_n:
            for b in range(0, a + 1):
                c_max = (max_n + b * b) // (4 * a)
                c = a
                while c <= c_max:
                    m = 4 * a * c - b * b
                    if b == a:
                        out[m] += 4 if c == a else 12
                    elif b == 0:
                        out[m] += 6 if c == a else 12
                    else:
                        out[m] += 12 if c == a else 24
                    c += 1
            a += 1
    return out_arr
