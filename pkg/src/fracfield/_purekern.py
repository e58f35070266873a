"""Pure-Python numeric core: Gauss hypergeometric evaluation tuned for the
radial-kernel parameter family, and the closed-form degree-m kernel.

The compiled module ``_fastkern`` mirrors every public function here with
identical operation order; ``backend`` picks one at import time.

Hypergeometric branch plan
--------------------------
All kernel evaluations need F(a,b;c;z) with a = m-H, b = m+(N-1)/2, c = 2b
and z = 4rs/(r+s)^2.  The complement w = 1-z = ((r-s)/(r+s))^2 is computed
upstream from r,s so it is exact near the diagonal, and the evaluator
branches on w:

  w == 0          Gauss summation  F(a,b;c;1) = G(c)G(c-a-b)/(G(c-a)G(c-b))
  w >= 0.2        direct power series in z
  1e-9 <= w < .2  quadratic transformation (uses c = 2b):
                    F(a,b;2b;z) = ((1+sqrt w)/2)^(-2a)
                                  * F(a, a-b+1/2; b+1/2; u^2),
                    u = (1-sqrt w)/(1+sqrt w)
  0 < w < 1e-9    linear 1-z transformation when its near-integer
                  cancellation is tame; otherwise evaluate at four shifted
                  values of s = c-a-b (F is entire in the parameters) and
                  Neville-interpolate back.  The shift nodes sit at
                  round(s) +/- {1,2}*6e-5, far enough apart that the
                  ~1-ulp noise of lgamma at large arguments does not
                  dominate the divided differences.

The quadratic transformation has no pole at integer c-a-b, which is why it
replaces the linear one on most of the near-diagonal range.
"""
import math

import numpy as np

W_SERIES = 0.2     # w >= this: direct z-series
W_LINEAR = 1e-9    # w below this: linear-transformation zone
DELTA = 6e-5       # interpolation node spacing in s = c-a-b
EXPLODE = 100.0    # cancellation budget for the direct linear path


def gammaln_sign(x):
    """(log|Gamma(x)|, sign of Gamma(x)); x must not be a nonpositive integer."""
    if x > 0.0:
        return math.lgamma(x), 1.0
    s = -1.0 if (math.floor(x) % 2 != 0) else 1.0
    return math.lgamma(x), s


def series_2f1(a, b, c, z):
    """Direct power series; converges fast for |z| well below 1."""
    term = 1.0
    s = 1.0
    k = 0
    while k < 500000:
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        s += term
        if abs(term) <= 1e-18 * abs(s):
            break
        k += 1
    return s


def gauss_at1(a, b, c):
    """F(a,b;c;1) by the Gauss summation formula; needs c-a-b > 0."""
    lc, sc = gammaln_sign(c)
    ls, ss = gammaln_sign(c - a - b)
    lca, sca = gammaln_sign(c - a)
    lcb, scb = gammaln_sign(c - b)
    return sc * ss * sca * scb * math.exp(lc + ls - lca - lcb)


def quad_transform(a, b, w):
    """Quadratic transformation of F(a,b;2b;1-w), valid for c = 2b."""
    sw = math.sqrt(w)
    u = (1.0 - sw) / (1.0 + sw)
    pref = ((1.0 + sw) / 2.0) ** (-2.0 * a)
    return pref * series_2f1(a, a - b + 0.5, b + 0.5, u * u)


def linear_1mz(a, b, c, w):
    """Linear 1-z transformation, sign-aware in every Gamma factor."""
    s = c - a - b
    lc, sc = gammaln_sign(c)
    ls, ss = gammaln_sign(s)
    lca, sca = gammaln_sign(c - a)
    lcb, scb = gammaln_sign(c - b)
    t1 = sc * ss * sca * scb * math.exp(lc + ls - lca - lcb) \
        * series_2f1(a, b, 1.0 - s, w)
    la, sa = gammaln_sign(a)
    lb, sb = gammaln_sign(b)
    lg, sg = gammaln_sign(-s)
    coef = sc * sg * sa * sb * math.exp(lc + lg - la - lb)
    t2 = coef * w ** s * series_2f1(c - a, c - b, 1.0 + s, w)
    return t1 + t2


def linear_zone(a, b, c, w):
    """w < 1e-9: linear transformation with a Neville fallback in s.

    Near integer s = c-a-b the two terms of the linear transformation
    cancel to O(dist); when the estimated cancellation |ab| w / dist
    exceeds the budget (or s is an integer outright), evaluate at four
    shifted s values, keeping b and c fixed and moving a = c-b-s, then
    interpolate back to the true s.
    """
    s = c - a - b
    n0 = round(s)
    eps = s - n0
    dist = abs(eps)
    explosion = abs(a * b) * w / max(dist, 1e-300)
    if explosion < EXPLODE and dist > 1e-8:
        return linear_1mz(a, b, c, w)
    sig = [-2.0 * DELTA, -DELTA, DELTA, 2.0 * DELTA]
    y = [linear_1mz(c - b - (n0 + sj), b, c, w) for sj in sig]
    x = sig[:]
    for lev in range(1, 4):
        for i in range(4 - lev):
            y[i] = ((eps - x[i + lev]) * y[i] + (x[i] - eps) * y[i + 1]) \
                / (x[i] - x[i + lev])
    return y[0]


def f21_family(N, H, m, w):
    """F(m-H, m+(N-1)/2; 2m+N-1; 1-w) along the kernel parameter family."""
    a = m - H
    b = m + (N - 1) / 2.0
    c = 2.0 * b
    if w == 0.0:
        return gauss_at1(a, b, c)
    if w >= W_SERIES:
        return series_2f1(a, b, c, 1.0 - w)
    if w >= W_LINEAR:
        return quad_transform(a, b, w)
    return linear_zone(a, b, c, w)


def bm_closed(N, H, m, r, s):
    """Closed-form degree-m radial kernel b_m(r,s).

    b_m(r,s) = pi^{N/2}/Gamma(N/2+m) * [ (r^{2H}+s^{2H}) delta_{m0}
               - (Gamma(m-H)/Gamma(-H)) (rs)^m (r+s)^{2(H-m)} F(...) ]
    assembled in log space with explicit sign tracking (Gamma(-H) < 0).
    Zero whenever a radius is zero: the m=0 bracket cancels there and the
    (rs)^m factor kills every m >= 1 term.
    """
    if r <= 0.0 or s <= 0.0:
        return 0.0
    pref = math.pi ** (N / 2.0) / math.exp(math.lgamma(N / 2.0 + m))
    w = ((r - s) / (r + s)) ** 2
    F = f21_family(N, H, m, w)
    lnum, snum = gammaln_sign(m - H)
    lden, sden = gammaln_sign(-H)
    sign = snum * sden
    ln2 = lnum - lden + m * math.log(r * s) + 2.0 * (H - m) * math.log(r + s)
    t2 = -sign * math.exp(ln2) * F
    t1 = (r ** (2.0 * H) + s ** (2.0 * H)) if m == 0 else 0.0
    return pref * (t1 + t2)


def kernel_matrix(N, H, m, nodes):
    """Symmetric matrix b_m(r_i, r_j) over a 1-D node array."""
    nodes = np.asarray(nodes, dtype=np.float64)
    n = nodes.shape[0]
    K = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        ri = nodes[i]
        for j in range(i, n):
            K[i, j] = K[j, i] = bm_closed(N, H, m, ri, nodes[j])
    return K


def bm_row(N, H, m, r, nodes):
    """Vector b_m(r, r_j) over a 1-D node array."""
    nodes = np.asarray(nodes, dtype=np.float64)
    n = nodes.shape[0]
    out = np.empty(n, dtype=np.float64)
    for j in range(n):
        out[j] = bm_closed(N, H, m, r, nodes[j])
    return out
