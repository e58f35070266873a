"""Covariance of the isotropic self-similar Gaussian field and its radial
degree-m kernels b_m, with two independent evaluation paths: a Gauss-Jacobi
quadrature of the angular-average integral (the oracle) and the closed
hypergeometric form (the fast path, compiled when available).
"""
import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import roots_jacobi

from . import backend
from ._purekern import gammaln_sign
from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Field parameters: dimension N >= 1 and Hurst index H in (0,1)."""
    N: int
    H: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be an integer >= 1, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not 0.0 < self.H < 1.0:
            raise DomainError(f"H must lie in (0,1), got {self.H}")


@dataclass(frozen=True)
class RadialKernelSpec:
    """A radial kernel b_m: field parameters plus harmonic degree m >= 0."""
    params: ModelParams
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise DomainError(f"m must be an integer >= 0, got {self.m}")
        object.__setattr__(self, "m", int(self.m))


def covariance(x, y, params):
    """R(x,y) = (|x|^2H + |y|^2H - |x-y|^2H)/2 for points in R^N."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    H2 = 2.0 * params.H
    return 0.5 * (np.linalg.norm(x) ** H2 + np.linalg.norm(y) ** H2
                  - np.linalg.norm(x - y) ** H2)


def covariance_reduced(r, s, t, params):
    """R as a function of the two radii and the cosine of the angle.

    (r^2H + s^2H - (r^2+s^2-2rst)^H)/2; the squared chord is clamped at 0
    against rounding for nearly coincident points.  Zero radius gives an
    exact 0 (the field is pinned at the origin).
    """
    r, s, t = float(r), float(s), float(t)
    if r < 0.0 or s < 0.0:
        raise DomainError(f"radii must be >= 0, got r={r}, s={s}")
    if not -1.0 <= t <= 1.0:
        raise DomainError(f"cosine must lie in [-1,1], got {t}")
    if r == 0.0 or s == 0.0:
        return 0.0
    H = params.H
    chord2 = max(r * r + s * s - 2.0 * r * s * t, 0.0)
    return 0.5 * (r ** (2.0 * H) + s ** (2.0 * H) - chord2 ** H)


def _check_radii(r, s):
    if not (0.0 <= r <= 1.0 and 0.0 <= s <= 1.0):
        raise DomainError(f"radii must lie in [0,1], got r={r}, s={s}")


@lru_cache(maxsize=64)
def _jacobi_rule(nodes, N):
    # weight (1-t^2)^((N-3)/2) on [-1,1]
    a = (N - 3) / 2.0
    t, w = roots_jacobi(nodes, a, a)
    return t, w


@lru_cache(maxsize=64)
def _jacobi_rule_ab(nodes, alpha, beta):
    # weight (1-t)^alpha (1+t)^beta on [-1,1]
    t, w = roots_jacobi(nodes, alpha, beta)
    return t, w


def _ratio_values(m, N, t):
    """Gegenbauer ratio C_m^((N-2)/2)(t)/C_m^((N-2)/2)(1), vectorized.

    N=2 takes the Chebyshev limit T_m(t).
    """
    if m == 0:
        return np.ones_like(t)
    lam = (N - 2) / 2.0
    if lam == 0.0:
        prev, cur = np.ones_like(t), t.copy()
        for _ in range(2, m + 1):
            prev, cur = cur, 2.0 * t * cur - prev
        return cur
    prev, cur = np.ones_like(t), 2.0 * lam * t
    top_prev, top = 1.0, 2.0 * lam
    for k in range(2, m + 1):
        prev, cur = cur, (2.0 * t * (k + lam - 1.0) * cur
                          - (k + 2.0 * lam - 2.0) * prev) / k
        top_prev, top = top, (2.0 * (k + lam - 1.0) * top
                              - (k + 2.0 * lam - 2.0) * top_prev) / k
    return cur / top


def kernel_quadrature(spec, r, s, nodes=400):
    """b_m(r,s) by Gauss-Jacobi quadrature of the angular-average integral.

    b_m(r,s) = |S^{N-2}| * int_{-1}^{1} R(r,s,t) ratio_m(t) (1-t^2)^{(N-3)/2} dt,
    the independent oracle for kernel_closed_form.  Exactly symmetric in
    (r,s); exactly 0 when either radius is 0.

    Two conditioning refinements keep the oracle's relative accuracy on the
    exponentially small high-degree coefficients, without changing what is
    integrated: on the diagonal r=s, where R = r^2H - (2r^2)^H (1-t)^H / 2
    exactly, the (1-t)^H factor moves into the Jacobi weight and the rule
    becomes exact-to-rounding; off the diagonal, the degree-<m part of the
    smooth integrand is projected out through the very same rule (a zero of
    the rule by orthogonality, since the rule is exact to degree 2*nodes-1)
    and the remainder is accumulated in extended precision.  Accuracy still
    degrades for 0 < |r-s| << grid scale, where the integrand's complex
    singularity approaches the interval.
    """
    params = spec.params
    if params.N < 2:
        raise DomainError("radial kernels require N >= 2")
    if nodes < 2:
        raise DomainError(f"quadrature size must be >= 2, got {nodes}")
    _check_radii(r, s)
    if r == 0.0 or s == 0.0:
        return 0.0
    N, H, m = params.N, params.H, spec.m
    sphere = 2.0 * math.pi ** ((N - 1) / 2.0) / math.gamma((N - 1) / 2.0)
    a = (N - 3) / 2.0
    if r == s:
        const = 0.0
        if m == 0:
            # int (1-t^2)^a dt = B(1/2, (N-1)/2)
            total = math.exp(math.lgamma(0.5) + math.lgamma((N - 1) / 2.0)
                             - math.lgamma(N / 2.0))
            const = r ** (2.0 * H) * total
        # the auxiliary rule only needs polynomial exactness to degree m;
        # keep it small, since large nonsymmetric Jacobi rules accumulate
        # node/weight noise
        t2, w2 = _jacobi_rule_ab(max(17, m), a + H, a)
        sing = 0.5 * (2.0 * r * r) ** H * float(
            np.dot(w2, _ratio_values(m, N, t2)))
        return sphere * (const - sing)
    t, w = _jacobi_rule(nodes, N)
    tl = t.astype(np.longdouble)
    wl = w.astype(np.longdouble)
    rl, sl = np.longdouble(r), np.longdouble(s)
    h2 = np.longdouble(2.0 * H)
    chord2 = rl * rl + sl * sl - 2.0 * rl * sl * tl
    f = 0.5 * (rl ** h2 + sl ** h2 - chord2 ** (h2 / 2.0))
    for k in range(m):
        rk = _ratio_values(k, N, tl)
        f = f - (np.dot(wl * f, rk) / np.dot(wl * rk, rk)) * rk
    return sphere * float(np.dot(wl, f * _ratio_values(m, N, tl)))


def kernel_closed_form(spec, r, s):
    """b_m(r,s) in closed hypergeometric form.

    The Gamma-ratio factor is assembled in log space with explicit sign
    tracking (the ratio is negative for m >= 1), and the hypergeometric
    argument z = 4rs/(r+s)^2 is handled through its complement
    w = ((r-s)/(r+s))^2 so the diagonal z=1 is exact.
    """
    params = spec.params
    if params.N < 2:
        raise DomainError("radial kernels require N >= 2")
    _check_radii(r, s)
    return backend.bm_closed(params.N, params.H, spec.m, float(r), float(s))


def radial_kernel(spec, r, s):
    """The kernel the eigen machinery discretizes.

    N >= 2: the closed-form b_m.  N=1: the two-point covariance
    (r^2H + s^2H - |r-s|^2H)/2 on [0,1] (m must be 0); at H=1/2 this is
    min(r,s), the Brownian kernel.
    """
    if spec.params.N == 1:
        if spec.m != 0:
            raise DomainError("N=1 kernels exist only for m=0")
        _check_radii(r, s)
        H2 = 2.0 * spec.params.H
        return 0.5 * (r ** H2 + s ** H2 - abs(r - s) ** H2)
    return kernel_closed_form(spec, r, s)


def radial_kernel_matrix(spec, nodes):
    """Symmetric matrix [radial_kernel(r_i, r_j)] over a node vector."""
    nodes = np.asarray(nodes, dtype=np.float64)
    if spec.params.N == 1:
        if spec.m != 0:
            raise DomainError("N=1 kernels exist only for m=0")
        H2 = 2.0 * spec.params.H
        p = nodes ** H2
        return 0.5 * (p[:, None] + p[None, :]
                      - np.abs(nodes[:, None] - nodes[None, :]) ** H2)
    return backend.kernel_matrix(spec.params.N, spec.params.H, spec.m, nodes)


class KinkData(NamedTuple):
    """Local expansion of b_m(r,s) across the diagonal s=r.

    b_m = analytic + g1(rho)|d|^alpha + g2(rho)|d|^(alpha+2) + ...
    with d = r-s, rho the diagonal radius; in the degenerate case
    (alpha an even integer, reached e.g. at N=2, H=1/2) the non-analytic
    part is (g1 d^alpha + g2 d^(alpha+2)) ln|d| instead.
    """
    alpha: float
    g1: float
    g2: float
    is_log: bool


def kink_profile(spec, rho):
    """Diagonal-kink data for b_m at radius rho, used by the quadrature
    corrections in the eigen module.

    The exponent is alpha = 2s0 with s0 = (N-1)/2 + H, and g1 comes from
    the connection coefficient of the hypergeometric factor at unit
    argument; g2 is the next term of the same connection expansion.
    """
    params = spec.params
    N, H, m = params.N, params.H, spec.m
    rho = float(rho)
    if rho <= 0.0:
        raise DomainError(f"kink radius must be > 0, got {rho}")
    if N == 1:
        if m != 0:
            raise DomainError("N=1 kernels exist only for m=0")
        return KinkData(2.0 * H, -0.5, 0.0, False)
    s0 = (N - 1) / 2.0 + H
    a, b, c = m - H, m + (N - 1) / 2.0, 2.0 * m + N - 1.0
    lP = (N / 2.0) * math.log(math.pi) - math.lgamma(N / 2.0 + m)
    lG, sG = gammaln_sign(m - H)
    lGd, sGd = gammaln_sign(-H)
    la, sa = gammaln_sign(a)
    lb, sb = gammaln_sign(b)
    n0 = round(s0)
    if abs(s0 - n0) < 1e-8:
        lead = (lP + (lG - lGd) + 2.0 * m * math.log(rho)
                + (2.0 * (H - m) - 2.0 * n0) * math.log(2.0 * rho)
                + math.lgamma(c) - la - lb)
        sign = (sG / sGd) * sa * sb
        alpha, g1, is_log = 2.0 * n0, -2.0 * sign * math.exp(lead), True
    else:
        lgs, sgs = gammaln_sign(-s0)
        lead = (lP + (lG - lGd) + 2.0 * m * math.log(rho)
                + (2.0 * (H - m) - 2.0 * s0) * math.log(2.0 * rho)
                + math.lgamma(c) + lgs - la - lb)
        sign = (sG / sGd) * sgs * sa * sb
        alpha, g1, is_log = 2.0 * s0, -sign * math.exp(lead), False
    tau = (c - a) * (c - b) / (1.0 + s0)
    g2 = g1 * (tau - m) / (4.0 * rho * rho)
    return KinkData(alpha, g1, g2, is_log)


class GoldenRow(NamedTuple):
    """One pinned kernel value: (N, H, m, r, s, b_m)."""
    N: int
    H: float
    m: int
    r: float
    s: float
    b_m: float


GOLDEN_HEADER = ["N", "H", "m", "r", "s", "b_m"]


def write_golden_csv(path, rows):
    """Write golden kernel fixtures with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GOLDEN_HEADER)
        for row in rows:
            writer.writerow([
                f"{int(row.N)}", f"{row.H:.17g}", f"{int(row.m)}",
                f"{row.r:.17g}", f"{row.s:.17g}", f"{row.b_m:.17g}",
            ])


def read_golden_csv(path):
    """Read golden kernel fixtures written by write_golden_csv."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != GOLDEN_HEADER:
            raise DomainError(f"unexpected golden header: {header}")
        for rec in reader:
            rows.append(GoldenRow(int(rec[0]), float(rec[1]), int(rec[2]),
                                  float(rec[3]), float(rec[4]), float(rec[5])))
    return rows
