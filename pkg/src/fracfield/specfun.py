"""Special-function primitives: log-gamma, Gegenbauer polynomials, the Gauss
hypergeometric function on [0,1], real spherical harmonics for N in {2,3},
and the harmonic multiplicity h(m,N).
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _purekern as _pk
from .errors import DomainError

TWO_PI = 2.0 * math.pi


class LogGamma(NamedTuple):
    value: float   # log |Gamma(x)|
    sign: float    # sign of Gamma(x): +1.0 or -1.0


def log_gamma(x):
    """log|Gamma(x)| with the sign of Gamma(x) as a flag.

    Raises DomainError at the poles (nonpositive integers).
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"log_gamma pole at x={x}")
    val, sgn = _pk.gammaln_sign(x)
    return LogGamma(val, sgn)


def gegenbauer(m, lam, t):
    """Gegenbauer polynomial C_m^lam(t) by the three-term recurrence.

    At lam=0 the polynomials degenerate (C_m^0 = 0 for m >= 1); following
    the ratio convention used by the N=2 kernel integrand, lam=0 returns
    the Chebyshev polynomial T_m(t), the lam->0 limit of
    C_m^lam(t)/C_m^lam(1).
    """
    m = _check_degree(m)
    lam = float(lam)
    t = float(t)
    if lam < 0.0:
        raise DomainError(f"gegenbauer needs lam >= 0, got {lam}")
    if not -1.0 <= t <= 1.0:
        raise DomainError(f"gegenbauer needs t in [-1,1], got {t}")
    if lam == 0.0:
        return _chebyshev_t(m, t)
    if m == 0:
        return 1.0
    prev, cur = 1.0, 2.0 * lam * t
    for k in range(2, m + 1):
        prev, cur = cur, (2.0 * t * (k + lam - 1.0) * cur
                          - (k + 2.0 * lam - 2.0) * prev) / k
    return cur


def gegenbauer_ratio(m, lam, t):
    """C_m^lam(t) / C_m^lam(1), taking the Chebyshev limit T_m(t) at lam=0.

    This is the normalized form appearing in the reduced-covariance
    expansion; exposing it directly means no caller ever divides by
    C_m^0(1).
    """
    m = _check_degree(m)
    if float(lam) == 0.0:
        if not -1.0 <= float(t) <= 1.0:
            raise DomainError(f"gegenbauer_ratio needs t in [-1,1], got {t}")
        return _chebyshev_t(m, float(t))
    return gegenbauer(m, lam, t) / gegenbauer(m, lam, 1.0)


def _chebyshev_t(m, t):
    if m == 0:
        return 1.0
    prev, cur = 1.0, t
    for _ in range(2, m + 1):
        prev, cur = cur, 2.0 * t * cur - prev
    return cur


def _check_degree(m):
    if not float(m).is_integer() or m < 0:
        raise DomainError(f"degree must be an integer >= 0, got {m}")
    return int(m)


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric F(a,b;c;z) for real parameters and z in [0,1].

    Dispatches between the direct series, the Gauss summation at z=1, the
    quadratic transformation (when c = 2b exactly), and the linear 1-z
    transformation with a parameter-interpolation fallback near integer
    c-a-b.  Relative accuracy ~1e-10 over the closed interval; at z=1 the
    value exists only for c-a-b > 0 (DomainError otherwise).
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if c <= 0.0 and c == math.floor(c):
        raise DomainError(f"gauss_2f1 pole: c={c} is a nonpositive integer")
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"gauss_2f1 needs z in [0,1], got {z}")
    if z == 0.0:
        return 1.0
    s = c - a - b
    if z == 1.0:
        if s <= 0.0:
            raise DomainError(
                f"gauss_2f1 diverges at z=1 when c-a-b <= 0 (got {s})")
        return _pk.gauss_at1(a, b, c)
    w = 1.0 - z
    if w >= _pk.W_SERIES:
        return _pk.series_2f1(a, b, c, z)
    if c == 2.0 * b:
        return _pk.quad_transform(a, b, w)
    # generic parameters near z=1: linear transformation when its
    # near-integer cancellation is tame, else series (still convergent for
    # w >= 1e-4 within the term cap), else the interpolation fallback
    dist = abs(s - round(s))
    explosion = abs(a * b) * w / max(dist, 1e-300)
    if dist > 1e-8 and explosion < _pk.EXPLODE:
        return _pk.linear_1mz(a, b, c, w)
    if w >= 1e-4:
        return _pk.series_2f1(a, b, c, z)
    return _pk.linear_zone(a, b, c, w)


def multiplicity(m, N):
    """Number h(m,N) of degree-m spherical harmonics on S^{N-1}.

    h(0,N) = 1; for m >= 1, h(m,N) = (2m+N-2) (m+N-3)! / ((N-2)! m!).
    """
    m = _check_degree(m)
    if int(N) != N or N < 2:
        raise DomainError(f"multiplicity needs integer N >= 2, got {N}")
    N = int(N)
    if m == 0:
        return 1
    num = (2 * m + N - 2) * math.factorial(m + N - 3)
    return num // (math.factorial(N - 2) * math.factorial(m))


@dataclass(frozen=True)
class AngleCoords:
    """Spherical angles: azimuth phi in [0,2pi), N-2 polar angles in [0,pi]."""
    phi: float
    thetas: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 <= self.phi < TWO_PI:
            raise DomainError(f"phi must lie in [0,2pi), got {self.phi}")
        for th in self.thetas:
            if not 0.0 <= th <= math.pi:
                raise DomainError(f"polar angle must lie in [0,pi], got {th}")


def sph_harm(N, m, l, angles):
    """Real spherical harmonic S^l_m on S^{N-1}, orthonormal w.r.t. dS.

    N=2 basis: 1/sqrt(2pi); cos(m phi)/sqrt(pi), sin(m phi)/sqrt(pi).
    N=3 basis: fully-normalized associated Legendre functions times
    {1, sqrt2 cos(k phi), sqrt2 sin(k phi)}, indexed l = 1..2m+1 with
    l=1 the zonal term and l=2k / 2k+1 the cos/sin pair of order k.
    """
    if N not in (2, 3):
        raise DomainError(
            f"dimension not supported for synthesis: N={N} (need 2 or 3)")
    m = _check_degree(m)
    h = multiplicity(m, N)
    if not 1 <= l <= h:
        raise DomainError(f"harmonic index l={l} outside 1..{h} for m={m}")
    if len(angles.thetas) != N - 2:
        raise DomainError(
            f"AngleCoords has {len(angles.thetas)} polar angles, N={N} needs {N - 2}")
    if N == 2:
        return float(_sph_harm_n2(m, l, np.float64(angles.phi)))
    return float(_sph_harm_n3(m, l, np.float64(angles.thetas[0]),
                              np.float64(angles.phi)))


def _sph_harm_n2(m, l, phi):
    if m == 0:
        return np.ones_like(phi) / math.sqrt(TWO_PI)
    if l == 1:
        return np.cos(m * phi) / math.sqrt(math.pi)
    return np.sin(m * phi) / math.sqrt(math.pi)


def _sph_harm_n3(m, l, theta, phi):
    if l == 1:
        k = 0
    else:
        k = l // 2
    p = _legendre_norm(m, k, np.cos(theta), np.sin(theta))
    if k == 0:
        return p
    if l % 2 == 0:
        return math.sqrt(2.0) * p * np.cos(k * phi)
    return math.sqrt(2.0) * p * np.sin(k * phi)


def _legendre_norm(m, k, x, sx):
    """Fully normalized associated Legendre p_m^k(x), sx = sqrt(1-x^2).

    Normalized so that p_m^0 and sqrt2 p_m^k cos/sin(k phi) integrate to 1
    against dS on the unit 2-sphere.  Standard stable recurrences: diagonal
    to (k,k), one off-diagonal step, then upward in degree.
    """
    p = np.full_like(np.asarray(x, dtype=np.float64),
                     1.0 / math.sqrt(4.0 * math.pi))
    for j in range(1, k + 1):
        p = math.sqrt((2.0 * j + 1.0) / (2.0 * j)) * sx * p
    if m == k:
        return p
    p_prev = p
    p = math.sqrt(2.0 * k + 3.0) * x * p
    for deg in range(k + 2, m + 1):
        a = math.sqrt((4.0 * deg * deg - 1.0) / (deg * deg - k * k))
        b = math.sqrt((2.0 * deg + 1.0) * ((deg - 1.0) ** 2 - k * k)
                      / ((2.0 * deg - 3.0) * (deg * deg - k * k)))
        p, p_prev = a * x * p - b * p_prev, p
    return p


def sph_harm_table(N, m_max, phi, theta=None):
    """All harmonics S^l_m(angles) for m <= m_max, vectorized over points.

    Returns a dict (m,l) -> ndarray matching the shape of phi.  Used by the
    synthesis and coefficient code, which needs every basis function on a
    point cloud at once; values agree with sph_harm elementwise.
    """
    phi = np.asarray(phi, dtype=np.float64)
    out = {}
    if N == 2:
        out[(0, 1)] = np.full_like(phi, 1.0 / math.sqrt(TWO_PI))
        for m in range(1, m_max + 1):
            out[(m, 1)] = np.cos(m * phi) / math.sqrt(math.pi)
            out[(m, 2)] = np.sin(m * phi) / math.sqrt(math.pi)
        return out
    if N != 3:
        raise DomainError(
            f"dimension not supported for synthesis: N={N} (need 2 or 3)")
    theta = np.asarray(theta, dtype=np.float64)
    x, sx = np.cos(theta), np.sin(theta)
    for m in range(m_max + 1):
        out[(m, 1)] = _legendre_norm(m, 0, x, sx)
        for k in range(1, m + 1):
            p = math.sqrt(2.0) * _legendre_norm(m, k, x, sx)
            out[(m, 2 * k)] = p * np.cos(k * phi)
            out[(m, 2 * k + 1)] = p * np.sin(k * phi)
    return out
