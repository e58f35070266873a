# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mirror of ``_purekern``: same branch plan, same operation order.

Kept in lockstep with the pure module so the two backends agree to the last
few ulps; the parity test in the suite enforces this.
"""
import numpy as np

from libc.math cimport lgamma, floor, fabs, exp, log, sqrt, pow

cdef double PI = 3.141592653589793  # closest double to pi, same as math.pi

cdef double W_SERIES = 0.2
cdef double W_LINEAR = 1e-9
cdef double DELTA = 6e-5
cdef double EXPLODE = 100.0


cdef inline double _sign_gamma(double x) nogil:
    # Gamma alternates sign between consecutive negative integers
    cdef long k
    if x > 0.0:
        return 1.0
    k = <long> floor(x)
    if k % 2 != 0:
        return -1.0
    return 1.0


cdef double _series_2f1(double a, double b, double c, double z) nogil:
    cdef double term = 1.0
    cdef double s = 1.0
    cdef long k = 0
    while k < 500000:
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        s += term
        if fabs(term) <= 1e-18 * fabs(s):
            break
        k += 1
    return s


cdef double _gauss_at1(double a, double b, double c) nogil:
    cdef double sgn = _sign_gamma(c) * _sign_gamma(c - a - b) \
        * _sign_gamma(c - a) * _sign_gamma(c - b)
    return sgn * exp(lgamma(c) + lgamma(c - a - b) - lgamma(c - a) - lgamma(c - b))


cdef double _quad_transform(double a, double b, double w) nogil:
    cdef double sw = sqrt(w)
    cdef double u = (1.0 - sw) / (1.0 + sw)
    cdef double pref = pow((1.0 + sw) / 2.0, -2.0 * a)
    return pref * _series_2f1(a, a - b + 0.5, b + 0.5, u * u)


cdef double _linear_1mz(double a, double b, double c, double w) nogil:
    cdef double s = c - a - b
    cdef double t1 = _sign_gamma(c) * _sign_gamma(s) * _sign_gamma(c - a) \
        * _sign_gamma(c - b) \
        * exp(lgamma(c) + lgamma(s) - lgamma(c - a) - lgamma(c - b)) \
        * _series_2f1(a, b, 1.0 - s, w)
    cdef double coef = _sign_gamma(c) * _sign_gamma(-s) * _sign_gamma(a) \
        * _sign_gamma(b) * exp(lgamma(c) + lgamma(-s) - lgamma(a) - lgamma(b))
    cdef double t2 = coef * pow(w, s) * _series_2f1(c - a, c - b, 1.0 + s, w)
    return t1 + t2


cdef double _linear_zone(double a, double b, double c, double w) nogil:
    cdef double s = c - a - b
    cdef double n0 = floor(s + 0.5)
    cdef double eps = s - n0
    cdef double dist = fabs(eps)
    cdef double denom = dist
    cdef double explosion
    cdef double x[4]
    cdef double y[4]
    cdef int i, lev
    if denom < 1e-300:
        denom = 1e-300
    explosion = fabs(a * b) * w / denom
    if explosion < EXPLODE and dist > 1e-8:
        return _linear_1mz(a, b, c, w)
    x[0] = -2.0 * DELTA; x[1] = -DELTA; x[2] = DELTA; x[3] = 2.0 * DELTA
    for i in range(4):
        y[i] = _linear_1mz(c - b - (n0 + x[i]), b, c, w)
    for lev in range(1, 4):
        for i in range(4 - lev):
            y[i] = ((eps - x[i + lev]) * y[i] + (x[i] - eps) * y[i + 1]) \
                / (x[i] - x[i + lev])
    return y[0]


cdef double _f21_family(int N, double H, int m, double w) nogil:
    cdef double a = m - H
    cdef double b = m + (N - 1) / 2.0
    cdef double c = 2.0 * b
    if w == 0.0:
        return _gauss_at1(a, b, c)
    if w >= W_SERIES:
        return _series_2f1(a, b, c, 1.0 - w)
    if w >= W_LINEAR:
        return _quad_transform(a, b, w)
    return _linear_zone(a, b, c, w)


cdef double _bm_closed(int N, double H, int m, double r, double s) nogil:
    cdef double pref, w, F, sign, ln2, t1, t2
    if r <= 0.0 or s <= 0.0:
        return 0.0
    pref = pow(PI, N / 2.0) / exp(lgamma(N / 2.0 + m))
    w = ((r - s) / (r + s)) * ((r - s) / (r + s))
    F = _f21_family(N, H, m, w)
    sign = _sign_gamma(m - H) * _sign_gamma(-H)
    ln2 = lgamma(m - H) - lgamma(-H) + m * log(r * s) \
        + 2.0 * (H - m) * log(r + s)
    t2 = -sign * exp(ln2) * F
    t1 = 0.0
    if m == 0:
        t1 = pow(r, 2.0 * H) + pow(s, 2.0 * H)
    return pref * (t1 + t2)


def gammaln_sign(double x):
    if x > 0.0:
        return lgamma(x), 1.0
    return lgamma(x), _sign_gamma(x)


def series_2f1(double a, double b, double c, double z):
    return _series_2f1(a, b, c, z)


def gauss_at1(double a, double b, double c):
    return _gauss_at1(a, b, c)


def quad_transform(double a, double b, double w):
    return _quad_transform(a, b, w)


def linear_1mz(double a, double b, double c, double w):
    return _linear_1mz(a, b, c, w)


def linear_zone(double a, double b, double c, double w):
    return _linear_zone(a, b, c, w)


def f21_family(int N, double H, int m, double w):
    return _f21_family(N, H, m, w)


def bm_closed(int N, double H, int m, double r, double s):
    return _bm_closed(N, H, m, r, s)


def kernel_matrix(int N, double H, int m, nodes):
    cdef const double[::1] nd = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t n = nd.shape[0]
    K = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] Kv = K
    cdef Py_ssize_t i, j
    cdef double ri
    with nogil:
        for i in range(n):
            ri = nd[i]
            for j in range(i, n):
                Kv[i, j] = _bm_closed(N, H, m, ri, nd[j])
                Kv[j, i] = Kv[i, j]
    return K


def bm_row(int N, double H, int m, double r, nodes):
    cdef const double[::1] nd = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t n = nd.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t j
    with nogil:
        for j in range(n):
            ov[j] = _bm_closed(N, H, m, r, nd[j])
    return out
