"""Coefficient space of the field: Fourier tables, the Strassen norm,
representers, and projection onto the unit norm ball.

A function on the ball is represented by its table f^l_mn of coefficients
against the product basis psi_mn(r) S^l_m(angles); the squared norm is
sum (f^l_mn)^2 / lambda_mn.  Coefficients are computed against the dr x dS
product measure (NOT r^{N-1} dr), which is the measure the radial
eigenproblem is self-adjoint under; the radial quadrature reuses the
eigensystem's own nodes so that discrete orthonormality — and hence
Parseval — is exact to rounding for functions inside the truncated span.
"""
import csv
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import specfun
from .errors import (ConfigError, DomainError, IllPosedError,
                     ResolutionError)
from .field import _check_points, _kl_basis, _normalize_eigensystems
from .kernel import ModelParams
from .mercer import EigenSystem, eigenfunction_values

_NORM_BALL_TOL = 1e-12


@dataclass(frozen=True)
class RkhsFunction:
    """Immutable coefficient table f^l_mn with its truncation.

    Keys are (m, n, l) with m <= m0, 1 <= n <= n0, 1 <= l <= h(m, N).
    """
    params: ModelParams
    truncation: Tuple[int, int]
    coeffs: Mapping[Tuple[int, int, int], float]

    def __post_init__(self):
        m0, n0 = self.truncation
        table = {}
        for (m, n, l), v in dict(self.coeffs).items():
            if not (0 <= m <= m0 and 1 <= n <= n0):
                raise DomainError(
                    f"coefficient index (m={m}, n={n}) outside truncation "
                    f"(m0={m0}, n0={n0})")
            if not 1 <= l <= specfun.multiplicity(m, self.params.N):
                raise DomainError(
                    f"l={l} out of range for m={m}, N={self.params.N}")
            v = float(v)
            if not math.isfinite(v):
                raise DomainError(f"non-finite coefficient at ({m},{n},{l})")
            table[(m, n, l)] = v
        object.__setattr__(self, "coeffs", MappingProxyType(table))


def _lambda_of(table, key):
    """Eigenvalue for a coefficient key, or None if the mode was discarded."""
    m, n, l = key
    es = table.get(m)
    if es is None or n > len(es.lambdas):
        return None
    return float(es.lambdas[n - 1])


def _es_table(eigensystems, params, m0, n0):
    return _normalize_eigensystems(eigensystems, params, m0, n0)


def strassen_norm(f: RkhsFunction, eigensystems) -> float:
    """sqrt(sum (f^l_mn)^2 / lambda_mn) over the coefficient table."""
    m0, n0 = f.truncation
    if hasattr(eigensystems, "keys"):
        table = dict(eigensystems)
    else:
        table = {es.spec.m: es for es in eigensystems}
    total = 0.0
    for key, c in f.coeffs.items():
        lam = _lambda_of(table, key)
        if lam is None:
            raise IllPosedError(
                f"coefficient at (m,n,l)={key} indexes a discarded mode; "
                f"the norm is not certifiable at this truncation")
        total += c * c / lam
    return math.sqrt(total)


def inner_product(f: RkhsFunction, g: RkhsFunction, eigensystems) -> float:
    """sum f^l_mn g^l_mn / lambda_mn over shared coefficient keys."""
    if f.params != g.params:
        raise DomainError("inner product requires matching params")
    if hasattr(eigensystems, "keys"):
        table = dict(eigensystems)
    else:
        table = {es.spec.m: es for es in eigensystems}
    total = 0.0
    for key, c in f.coeffs.items():
        d = g.coeffs.get(key)
        if d is None or d == 0.0 or c == 0.0:
            continue
        lam = _lambda_of(table, key)
        if lam is None:
            raise IllPosedError(
                f"coefficient at (m,n,l)={key} indexes a discarded mode")
        total += c * d / lam
    return total


def representer(y, eigensystems, truncation) -> RkhsFunction:
    """Coefficient table of R(., y): lambda_mn psi_mn(|y|) S^l_m(y-hat).

    The reproducing element of point evaluation at y, truncated; y = 0
    gives the zero function since every psi_mn(0) = 0.
    """
    m0, n0 = truncation
    some = (eigensystems[0] if hasattr(eigensystems, "keys")
            else list(eigensystems)[0])
    params = some.spec.params
    pts = _check_points(np.asarray(y, dtype=np.float64).reshape(1, -1),
                        params.N)
    table = _es_table(eigensystems, params, m0, n0)
    _, basis, ids = _kl_basis(params, table, truncation, pts)
    coeffs = {}
    for col, (m, l, n) in enumerate(ids):
        lam = table[m].lambdas[n - 1]
        # basis column is sqrt(lambda) psi S; the representer wants
        # lambda psi S.
        coeffs[(m, n, l)] = math.sqrt(lam) * basis[0, col]
    return RkhsFunction(params=params, truncation=(m0, n0), coeffs=coeffs)


def synthesize(f: RkhsFunction, eigensystems, points) -> np.ndarray:
    """Pointwise values sum f^l_mn psi_mn(|x|) S^l_m(x-hat)."""
    m0, n0 = f.truncation
    table = _es_table(eigensystems, f.params, m0, n0)
    pts = _check_points(points, f.params.N)
    _, basis, ids = _kl_basis(f.params, table, f.truncation, pts)
    vec = np.empty(len(ids))
    for col, (m, l, n) in enumerate(ids):
        lam = table[m].lambdas[n - 1]
        vec[col] = f.coeffs.get((m, n, l), 0.0) / math.sqrt(lam)
    return basis @ vec


def project_to_ball(f: RkhsFunction, eigensystems) -> RkhsFunction:
    """Metric projection onto the unit norm ball: scale by 1/norm outside.

    Norms within 1e-12 of 1 count as inside, which makes the projection
    idempotent as a map on coefficient tables.
    """
    norm = strassen_norm(f, eigensystems)
    if norm <= 1.0 + _NORM_BALL_TOL:
        return f
    scale = 1.0 / norm
    coeffs = {k: scale * v for k, v in f.coeffs.items()}
    return RkhsFunction(params=f.params, truncation=f.truncation,
                        coeffs=coeffs)


# ---------------------------------------------------------------------------
# coefficient quadrature


@dataclass(frozen=True)
class CoeffGrid:
    """Product quadrature grid over [0,1] x S^{N-1} for coefficients.

    points has one row per (radial node, angular node) in C order:
    the radial index varies slowest.
    """
    params: ModelParams
    points: np.ndarray
    radii: np.ndarray
    radial_weights: np.ndarray
    angular_weights: np.ndarray
    phi: np.ndarray
    theta: Optional[np.ndarray]

    @property
    def shape(self):
        return (self.radii.size, self.angular_weights.size)


def coeff_grid(eigensystems, truncation, angular_size=None,
               theta_size=None) -> CoeffGrid:
    """Build the coefficient quadrature grid for a truncation.

    Radial: the (shared) nodes and weights of the eigensystems, so the
    discrete radial products of retained eigenfunctions are exactly
    orthonormal.  Angular: N=2 equally-spaced angles (exact for
    trigonometric degree < size), N=3 Gauss-Legendre in cos(theta) times
    equally-spaced phi.  The angular grid must hold at least 4*m0 points
    (Nyquist-style guard).
    """
    m0, n0 = truncation
    some = (eigensystems[0] if hasattr(eigensystems, "keys")
            else list(eigensystems)[0])
    params = some.spec.params
    N = params.N
    if N not in (2, 3):
        raise DomainError(
            f"dimension not supported for synthesis: N={N} (need 2 or 3)")
    table = _es_table(eigensystems, params, m0, n0)
    nodes = table[0].nodes
    weights = table[0].weights
    for m in range(m0 + 1):
        if not np.array_equal(table[m].nodes, nodes):
            raise ConfigError(
                "eigensystems must share one radial grid for coefficients")
    if angular_size is None:
        angular_size = max(4 * m0, 8)
    if angular_size < max(4 * m0, 1):
        raise ResolutionError(
            f"angular grid of {angular_size} points cannot resolve m0={m0} "
            f"(need >= {4 * m0})")
    phi = 2.0 * math.pi * np.arange(angular_size) / angular_size
    if N == 2:
        ang_w = np.full(angular_size, 2.0 * math.pi / angular_size)
        dirs = np.column_stack([np.cos(phi), np.sin(phi)])
        pts = (nodes[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
        return CoeffGrid(params=params, points=pts, radii=nodes,
                         radial_weights=weights, angular_weights=ang_w,
                         phi=phi, theta=None)
    if theta_size is None:
        theta_size = max(2 * m0 + 2, 8)
    if theta_size < m0 + 1:
        raise ResolutionError(
            f"theta grid of {theta_size} points cannot resolve m0={m0} "
            f"(need >= {m0 + 1})")
    x, v = np.polynomial.legendre.leggauss(theta_size)
    theta = np.arccos(x)
    # angular nodes in C order: theta varies slowest, phi fastest
    th_grid = np.repeat(theta, angular_size)
    ph_grid = np.tile(phi, theta_size)
    ang_w = np.repeat(v, angular_size) * (2.0 * math.pi / angular_size)
    st, ct = np.sin(th_grid), np.cos(th_grid)
    dirs = np.column_stack([st * np.cos(ph_grid), st * np.sin(ph_grid), ct])
    pts = (nodes[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    return CoeffGrid(params=params, points=pts, radii=nodes,
                     radial_weights=weights, angular_weights=ang_w,
                     phi=ph_grid, theta=th_grid)


def fourier_coeffs(f, eigensystems, truncation, angular_size=None,
                   theta_size=None) -> RkhsFunction:
    """Coefficient table f^l_mn = int f psi_mn(r) S^l_m dS dr by quadrature.

    `f` is a callable on an (n, N) array of points, or an array of values
    with shape (n_radial, n_angular) on the grid returned by coeff_grid.
    The measure is dr x dS — not the volume measure.
    """
    m0, n0 = truncation
    grid = coeff_grid(eigensystems, truncation, angular_size=angular_size,
                      theta_size=theta_size)
    params = grid.params
    table = _es_table(eigensystems, params, m0, n0)
    n_rad, n_ang = grid.shape
    if callable(f):
        vals = np.asarray(f(grid.points), dtype=np.float64)
        vals = vals.reshape(n_rad, n_ang)
    else:
        vals = np.asarray(f, dtype=np.float64)
        if vals.shape != (n_rad, n_ang):
            if vals.size == n_rad * n_ang:
                vals = vals.reshape(n_rad, n_ang)
            else:
                raise ResolutionError(
                    f"function values of shape {vals.shape} do not match "
                    f"the quadrature grid {(n_rad, n_ang)}")
    sph = specfun.sph_harm_table(params.N, m0, grid.phi, grid.theta)
    # angular reduction first: A[m,l-block] per radial node
    coeffs = {}
    for m in range(m0 + 1):
        es = table[m]
        psi_nodes = es.psi[:, :n0]            # (n_rad, n0) values at nodes
        wpsi = grid.radial_weights[:, None] * psi_nodes
        for l in range(1, specfun.multiplicity(m, params.N) + 1):
            ang = vals @ (grid.angular_weights * sph[(m, l)])   # (n_rad,)
            cvec = ang @ wpsi                                    # (n0,)
            for n in range(1, n0 + 1):
                coeffs[(m, n, l)] = float(cvec[n - 1])
    return RkhsFunction(params=params, truncation=(m0, n0), coeffs=coeffs)


# ---------------------------------------------------------------------------
# membership diagnostics


@dataclass(frozen=True)
class MembershipReport:
    """Partial sums of the norm series across a truncation schedule."""
    schedule: tuple
    partial_sums: tuple
    increments: tuple
    ratios: tuple
    verdict: str
    limit_estimate: Optional[float]


def bernstein_membership(f, eigensystems, schedule, angular_size=None,
                         theta_size=None) -> MembershipReport:
    """Ratio-test verdict on sum (f^l_mn)^2/lambda_mn along a schedule.

    The schedule is a list of (m0, n0) pairs, increasing in both entries;
    coefficients are computed once at the largest truncation and partial
    sums restricted.  The raw increment ratio tends to 1 for power-law
    tails whether or not the series converges, so the verdict uses the
    schedule-invariant tail exponent gamma = log(increment ratio) /
    log(truncation-size ratio): partial sums behave like a power s^(1+gamma)
    of the truncation size s, so gamma <= -1.3 reads "converged",
    gamma >= -0.7 "diverging", and the window between (or a non-monotone
    tail) "inconclusive".  A numerical trend report, not a theorem.
    """
    sched = [tuple(s) for s in schedule]
    if len(sched) < 2:
        raise DomainError("schedule needs at least two truncations")
    for a, b in zip(sched, sched[1:]):
        if not (b[0] >= a[0] and b[1] >= a[1] and b != a):
            raise DomainError(
                f"schedule must increase, got {a} then {b}")
    m_top, n_top = sched[-1]
    big = fourier_coeffs(f, eigensystems, (m_top, n_top),
                         angular_size=angular_size, theta_size=theta_size)
    if hasattr(eigensystems, "keys"):
        table = dict(eigensystems)
    else:
        table = {es.spec.m: es for es in eigensystems}
    sums = []
    for (m0, n0) in sched:
        q = 0.0
        for (m, n, l), c in big.coeffs.items():
            if m <= m0 and n <= n0 and c != 0.0:
                lam = _lambda_of(table, (m, n, l))
                if lam is None:
                    raise IllPosedError(
                        f"mode (m,n,l)=({m},{n},{l}) discarded")
                q += c * c / lam
        sums.append(q)
    incs = [b - a for a, b in zip(sums, sums[1:])]
    ratios = []
    for a, b in zip(incs, incs[1:]):
        ratios.append(b / a if a > 0.0 else (0.0 if b <= 0.0 else math.inf))
    sizes = [max(m0, n0) for (m0, n0) in sched]
    if sums[-1] == 0.0 or (incs and max(incs) <= 0.0):
        return MembershipReport(tuple(sched), tuple(sums), tuple(incs),
                                tuple(ratios), "converged", sums[-1])
    gammas = []
    for k in range(1, len(incs)):
        if incs[k - 1] > 0.0 and incs[k] > 0.0 and sizes[k + 1] > sizes[k]:
            gammas.append(math.log(incs[k] / incs[k - 1])
                          / math.log(sizes[k + 1] / sizes[k]))
    if not gammas:
        return MembershipReport(tuple(sched), tuple(sums), tuple(incs),
                                tuple(ratios), "inconclusive", None)
    gamma = float(np.median(gammas[-3:]))
    if gamma <= -1.3:
        # power-tail extrapolation: remaining mass ~ int_s^inf c t^gamma dt
        s1, s0 = sizes[-1], sizes[-2]
        est = sums[-1]
        denom = s0 ** (gamma + 1.0) - s1 ** (gamma + 1.0)
        if incs[-1] > 0.0 and denom > 0.0:
            est += incs[-1] * s1 ** (gamma + 1.0) / denom
        return MembershipReport(tuple(sched), tuple(sums), tuple(incs),
                                tuple(ratios), "converged", est)
    if gamma >= -0.7:
        return MembershipReport(tuple(sched), tuple(sums), tuple(incs),
                                tuple(ratios), "diverging", None)
    return MembershipReport(tuple(sched), tuple(sums), tuple(incs),
                            tuple(ratios), "inconclusive", None)


# ---------------------------------------------------------------------------
# serialization

COEFF_HEADER = ["m", "n", "l", "value"]


def write_coeff_csv(f: RkhsFunction, path):
    """Coefficient table as CSV rows (m, n, l, value), 17 digits."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# rkhs N={f.params.N} H={f.params.H:.17g} "
                 f"m0={f.truncation[0]} n0={f.truncation[1]}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COEFF_HEADER)
        for (m, n, l) in sorted(f.coeffs):
            writer.writerow([m, n, l, f"{f.coeffs[(m, n, l)]:.17g}"])


def read_coeff_csv(path) -> RkhsFunction:
    with open(path, newline="") as fh:
        meta = fh.readline().strip()
        if not meta.startswith("# rkhs "):
            raise ConfigError(f"not a coefficient table: {path}")
        kv = dict(part.split("=", 1)
                  for part in meta.lstrip("# ").split()[1:])
        params = ModelParams(N=int(kv["N"]), H=float(kv["H"]))
        truncation = (int(kv["m0"]), int(kv["n0"]))
        reader = csv.reader(fh)
        header = next(reader)
        if header != COEFF_HEADER:
            raise ConfigError(f"unexpected header {header} in {path}")
        coeffs = {}
        for row in reader:
            coeffs[(int(row[0]), int(row[1]), int(row[2]))] = float(row[3])
    return RkhsFunction(params=params, truncation=truncation, coeffs=coeffs)
