"""Sample-path generation on point sets in the closed unit ball.

Three routes: truncated eigenfunction synthesis (the authoritative sampler
inside the ball), exact dense-covariance factorization (the oracle), and a
frequency-domain sampler built on antipodally paired cells of a radial-shell
by direction grid (authoritative for band-limited experiments).

Reproducibility contract: every random draw comes from a counter-based
stream keyed by (seed, tag, index...), so replica j of an ensemble is the
j-th element of each stream and results are schedule-independent.
"""
import csv
import json
import math
from dataclasses import dataclass, field as dataclass_field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg
from scipy.special import j0 as _bessel_j0

from . import specfun
from .errors import ConfigError, DomainError, NumericError
from .kernel import ModelParams
from .mercer import eigenfunction_values

TAG_KL = 1
TAG_CHOLESKY = 2
TAG_SPECTRAL = 3

_BALL_TOL = 1e-12


@dataclass(frozen=True)
class RngStream:
    """A named substream: same (seed, stream_id) -> identical sequence."""
    seed: int
    stream_id: tuple

    def normals(self, count):
        """First `count` standard normals of the stream (prefix-stable)."""
        ss = np.random.SeedSequence((int(self.seed),) + tuple(
            int(v) for v in self.stream_id))
        gen = np.random.Generator(np.random.Philox(ss))
        return gen.standard_normal(count)


@dataclass(frozen=True)
class FreqGrid:
    """Radial-shell by direction discretization of frequency space."""
    shells: int = 256
    p_min: float = 1e-3
    p_max: float = 1e3

    def __post_init__(self):
        if self.shells < 1:
            raise DomainError(f"shells must be >= 1, got {self.shells}")
        if not 0.0 < self.p_min < self.p_max:
            raise DomainError(
                f"need 0 < p_min < p_max, got {self.p_min}, {self.p_max}")


@dataclass(frozen=True)
class FieldSample:
    """Field values over a point set, with full provenance for replay."""
    params: ModelParams
    points: np.ndarray
    values: np.ndarray
    method: str
    seed: int
    truncation: Optional[tuple] = None
    freq_grid: Optional[FreqGrid] = None
    replica: int = 0
    band: Optional[tuple] = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        vals = np.asarray(self.values, dtype=np.float64)
        if pts.shape[0] != vals.shape[0]:
            raise DomainError("one value per point required")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        pts.setflags(write=False)
        vals.setflags(write=False)


def _check_points(points, N, require_ball=True):
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != N:
        raise DomainError(
            f"points must be an (n,{N}) array, got shape {pts.shape}")
    if require_ball:
        radii = np.linalg.norm(pts, axis=1)
        if radii.size and radii.max() > 1.0 + _BALL_TOL:
            raise DomainError(
                f"point outside the closed unit ball: |x|={radii.max()}")
    return pts


def _angles_of(pts):
    """Radii and spherical angles of points (phi in [0,2pi))."""
    N = pts.shape[1]
    r = np.linalg.norm(pts, axis=1)
    if N == 2:
        phi = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi)
        return r, phi, None
    if N == 3:
        phi = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(r > 0.0, pts[:, 2] / np.where(r > 0.0, r, 1.0), 1.0)
        theta = np.arccos(np.clip(c, -1.0, 1.0))
        return r, phi, theta
    raise DomainError(
        f"dimension not supported for synthesis: N={N} (need 2 or 3)")


def _normalize_eigensystems(eigensystems, params, m_max, n_keep):
    """Map m -> EigenSystem, validated against params and the truncation."""
    if hasattr(eigensystems, "keys"):
        table = dict(eigensystems)
    else:
        table = {es.spec.m: es for es in eigensystems}
    for m in range(m_max + 1):
        es = table.get(m)
        if es is None:
            raise ConfigError(f"missing eigensystem for m={m}")
        if es.spec.params != params:
            raise ConfigError(
                f"eigensystem for m={m} was built for {es.spec.params}, "
                f"not {params}")
        if len(es.lambdas) < n_keep:
            raise ConfigError(
                f"eigensystem for m={m} has {len(es.lambdas)} modes, "
                f"need {n_keep}")
    return table


def _kl_basis(params, eigensystems, truncation, points):
    """Rows of the synthesis matrix: one row per point, one column per
    retained (m,l,n), scaled by sqrt(lambda)."""
    m0, n0 = truncation
    pts = _check_points(points, params.N)
    r, phi, theta = _angles_of(pts)
    table = _normalize_eigensystems(eigensystems, params, m0, n0)
    uniq, inv = np.unique(r, return_inverse=True)
    sph = specfun.sph_harm_table(params.N, m0, phi, theta)
    cols = []
    ids = []
    for m in range(m0 + 1):
        es = table[m]
        psi_u = eigenfunction_values(es, uniq, modes=range(1, n0 + 1))
        psi = psi_u[inv, :]
        lam = es.lambdas[:n0]
        for l in range(1, specfun.multiplicity(m, params.N) + 1):
            s_vals = sph[(m, l)]
            for n in range(1, n0 + 1):
                cols.append(math.sqrt(lam[n - 1]) * psi[:, n - 1] * s_vals)
                ids.append((m, l, n))
    basis = np.column_stack(cols) if cols else np.zeros((pts.shape[0], 0))
    return pts, basis, ids


def _kl_coeff_matrix(seed, ids, n_replicas):
    X = np.empty((len(ids), n_replicas))
    for row, (m, l, n) in enumerate(ids):
        X[row] = RngStream(seed, (TAG_KL, m, l, n)).normals(n_replicas)
    return X


def kl_synthesize(params, eigensystems, truncation, points, seed, replica=0):
    """Truncated eigenfunction synthesis at the given points.

    xi(x) = sum_{m<=m0, l<=h(m,N), n<=n0} sqrt(lambda_mn) xi^l_mn
    psi_mn(|x|) S^l_m(angles), with xi^l_mn standard normal from the
    per-(m,l,n) stream.  Exactly 0 at the origin since every psi_mn(0)=0.
    """
    if params.N not in (2, 3):
        raise DomainError(
            f"dimension not supported for synthesis: N={params.N} "
            f"(need 2 or 3)")
    pts, basis, ids = _kl_basis(params, eigensystems, truncation, points)
    X = _kl_coeff_matrix(seed, ids, replica + 1)[:, replica]
    return FieldSample(params=params, points=pts, values=basis @ X,
                       method="kl", seed=seed, truncation=tuple(truncation),
                       replica=replica)


def kl_ensemble(params, eigensystems, truncation, points, seed, n_replicas):
    """Matrix of kl_synthesize values: (n_points, n_replicas).

    Column j is bit-identical to kl_synthesize(..., replica=j).values.
    """
    if params.N not in (2, 3):
        raise DomainError(
            f"dimension not supported for synthesis: N={params.N} "
            f"(need 2 or 3)")
    pts, basis, ids = _kl_basis(params, eigensystems, truncation, points)
    X = _kl_coeff_matrix(seed, ids, n_replicas)
    out = np.empty((pts.shape[0], n_replicas))
    for j in range(n_replicas):       # matvec per column: bit-identical to
        out[:, j] = basis @ X[:, j]   # the single-replica path
    return out


def kl_theoretical_covariance(params, eigensystems, truncation, points):
    """Covariance of the truncated synthesis: B B^T for the basis matrix."""
    _, basis, _ = _kl_basis(params, eigensystems, truncation, points)
    return basis @ basis.T


def _gram(params, pts):
    """Covariance Gram matrix, row-blocked to bound transient memory."""
    H = params.H
    r2h = np.einsum("ij,ij->i", pts, pts) ** H
    n = pts.shape[0]
    G = np.empty((n, n))
    block = 1024
    for i0 in range(0, n, block):
        d2 = ((pts[i0:i0 + block, None, :] - pts[None, :, :]) ** 2).sum(-1)
        G[i0:i0 + block] = 0.5 * (r2h[i0:i0 + block, None] + r2h[None, :]
                                  - d2 ** H)
    return G


def _factor_gram(G):
    """Lower Cholesky factor of the Gram matrix, jittered once on failure.

    Zero-variance points (the origin) are excluded from the factorization
    and synthesize to exactly 0.
    """
    n = G.shape[0]
    live = np.diag(G) > 0.0
    sub = G[np.ix_(live, live)]
    L = np.zeros((n, n))
    if sub.size:
        try:
            Ls = scipy.linalg.cholesky(sub, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError:
            jitter = 1e-12 * np.trace(sub) / sub.shape[0]
            try:
                Ls = scipy.linalg.cholesky(
                    sub + jitter * np.eye(sub.shape[0]), lower=True,
                    check_finite=False)
            except scipy.linalg.LinAlgError as exc:
                raise NumericError(
                    f"covariance factorization failed after jitter: {exc}"
                ) from exc
        L[np.ix_(live, live)] = Ls
    return L


def cholesky_synthesize(params, points, seed, replica=0):
    """Exact finite-dimensional Gaussian sampler from the covariance.

    The oracle for every other sampler; any N >= 1.  Points may lie
    anywhere (the covariance is defined on all of R^N); ball membership
    is the synthesis modules' concern, not this oracle's.
    """
    pts = _check_points(points, params.N, require_ball=False)
    L = _factor_gram(_gram(params, pts))
    z = RngStream(seed, (TAG_CHOLESKY, replica)).normals(pts.shape[0])
    return FieldSample(params=params, points=pts, values=L @ z,
                       method="cholesky", seed=seed, replica=replica)


def cholesky_ensemble(params, points, seed, n_replicas):
    """Matrix of cholesky_synthesize values: (n_points, n_replicas)."""
    pts = _check_points(points, params.N, require_ball=False)
    L = _factor_gram(_gram(params, pts))
    out = np.empty((pts.shape[0], n_replicas))
    for j in range(n_replicas):
        z = RngStream(seed, (TAG_CHOLESKY, j)).normals(pts.shape[0])
        out[:, j] = L @ z
    return out


def c4_constant(params):
    """Normalizing constant of the frequency-domain representation.

    C4 = 2^H sqrt(H Gamma(N/2+H) / (2 pi^{N/2} Gamma(1-H))), fixed by the
    variance identity C4^2 int 2(1-cos<p,x>) |p|^{-N-2H} dp = |x|^{2H}
    (the variance_quadrature oracle verifies it directly).
    """
    N, H = params.N, params.H
    return 2.0 ** H * math.sqrt(
        H * math.gamma(N / 2.0 + H)
        / (2.0 * math.pi ** (N / 2.0) * math.gamma(1.0 - H)))


def _direction_pairs(N):
    """Unit directions d_k (one per antipodal pair) and the per-direction
    solid measure omega."""
    if N == 1:
        return np.array([[1.0]]), 1.0
    if N == 2:
        k = np.arange(32)
        ang = 2.0 * math.pi * (k + 0.5) / 64.0
        return np.column_stack([np.cos(ang), np.sin(ang)]), 2.0 * math.pi / 64.0
    if N == 3:
        k = np.arange(121)
        z = 1.0 - (2.0 * k + 1.0) / 121.0
        golden = math.pi * (3.0 - math.sqrt(5.0))
        ang = k * golden
        rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        dirs = np.column_stack([rho * np.cos(ang), rho * np.sin(ang), z])
        return dirs, 4.0 * math.pi / 242.0
    raise DomainError(f"no direction set for N={N}")


def _band_cells(params, band, freq_grid):
    """Shell edges and representative radii for the discretized band."""
    a, b = band
    if not (0.0 <= a < b):
        raise DomainError(f"need a band (a,b] with 0 <= a < b, got {band}")
    lo = max(a, freq_grid.p_min)
    hi = min(b, freq_grid.p_max)
    if not lo < hi:
        raise DomainError(
            f"band {band} does not intersect the frequency grid "
            f"[{freq_grid.p_min}, {freq_grid.p_max}]")
    edges = np.geomspace(lo, hi, freq_grid.shells + 1)
    reps = np.sqrt(edges[:-1] * edges[1:])
    H = params.H
    radial = (edges[:-1] ** (-2.0 * H) - edges[1:] ** (-2.0 * H)) / (2.0 * H)
    return edges, reps, radial


def _spectral_values(params, band, freq_grid, pts, seed, replicas):
    dirs, omega = _direction_pairs(params.N)
    _, reps, radial = _band_cells(params, band, freq_grid)
    c4 = c4_constant(params)
    amp = c4 * np.sqrt(2.0 * omega * radial)           # per shell
    phases = pts @ dirs.T                              # (n_points, n_pairs)
    n_replicas = len(replicas)
    out = np.zeros((pts.shape[0], n_replicas))
    need = 2 * (max(replicas) + 1)
    for k_shell in range(reps.size):
        cosP = np.cos(reps[k_shell] * phases) - 1.0
        sinP = np.sin(reps[k_shell] * phases)
        for k_pair in range(dirs.shape[0]):
            z = RngStream(seed, (TAG_SPECTRAL, k_shell, k_pair)).normals(need)
            ab = z.reshape(-1, 2)[replicas]            # (n_replicas, 2)
            out += amp[k_shell] * (
                np.outer(cosP[:, k_pair], ab[:, 0])
                - np.outer(sinP[:, k_pair], ab[:, 1]))
    return out


def _band_tag(band):
    a, b = band
    b_txt = "inf" if math.isinf(b) else f"{b:g}"
    return f"spectral_band({a:g},{b_txt}]"


def spectral_synthesize(params, band, freq_grid, points, seed, replica=0):
    """Frequency-domain sampler over antipodally paired cells.

    Each pair of cells (p, -p) contributes
    amp * [a (cos<p,x> - 1) - b sin<p,x>] with a,b standard normal and
    amp^2 = C4^2 * 2 * omega * int_shell p^{-1-2H} dp (the radial factor
    is exact; direction and phase are taken at the cell representative).
    Real by construction, exactly 0 at the origin.  The full-range band
    (b = inf) is realized on the grid's [p_min, p_max] span; the spectral
    mass outside is the documented truncation bias, quantified by
    variance_quadrature.
    """
    if params.N not in (1, 2, 3):
        raise DomainError(f"spectral synthesis supports N in 1..3, got "
                          f"{params.N}")
    pts = _check_points(points, params.N, require_ball=False)
    vals = _spectral_values(params, band, freq_grid, pts, seed, [replica])
    method = _band_tag(band) if np.isfinite(band[1]) else "spectral"
    return FieldSample(params=params, points=pts, values=vals[:, 0],
                       method=method, seed=seed, freq_grid=freq_grid,
                       replica=replica, band=(float(band[0]), float(band[1])))


def spectral_ensemble(params, band, freq_grid, points, seed, n_replicas):
    """Matrix of spectral_synthesize values: (n_points, n_replicas)."""
    if params.N not in (1, 2, 3):
        raise DomainError(f"spectral synthesis supports N in 1..3, got "
                          f"{params.N}")
    pts = _check_points(points, params.N, require_ball=False)
    return _spectral_values(params, band, freq_grid, pts, seed,
                            list(range(n_replicas)))


def spectral_band_variance(params, band, freq_grid, x):
    """Variance of the discretized band sampler at one point (no sampling)."""
    pts = _check_points(x, params.N, require_ball=False)
    dirs, omega = _direction_pairs(params.N)
    _, reps, radial = _band_cells(params, band, freq_grid)
    c4 = c4_constant(params)
    phases = pts @ dirs.T
    var = np.zeros(pts.shape[0])
    for k_shell in range(reps.size):
        one_m_cos = 1.0 - np.cos(reps[k_shell] * phases)
        var += (c4 ** 2 * 2.0 * omega * radial[k_shell]
                * 2.0 * one_m_cos.sum(axis=1))
    return var if var.size > 1 else float(var[0])


def _angular_average(N, z):
    """Mean of cos<p,x> over directions of p at |p||x| = z."""
    if N == 1:
        return np.cos(z)
    if N == 2:
        return _bessel_j0(z)
    out = np.ones_like(z)
    nz = z != 0.0
    out[nz] = np.sin(z[nz]) / z[nz]
    return out


def variance_quadrature(params, x_norm, band=(0.0, math.inf),
                        panels=400, nodes=24):
    """C4^2 int_band 2(1 - cos<p,x>) |p|^{-N-2H} d^N p by radial quadrature.

    The angular integral is closed-form (cos / J_0 / sinc by dimension);
    the radial integral runs over geometric panels of Gauss-Legendre rules
    on [max(a, P_LO), min(b, P_HI)], plus the analytic power tail
    int_b^inf p^{-1-2H} dp = b^{-2H}/(2H) when the band is unbounded
    (1 - angular average -> 1 there).  Equals |x|^{2H} on the full band:
    the deterministic oracle for c4_constant and for band additivity.
    """
    a, b = band
    if not (0.0 <= a < b):
        raise DomainError(f"need a band (a,b] with 0 <= a < b, got {band}")
    N, H = params.N, params.H
    r = float(x_norm)
    if r < 0.0:
        raise DomainError(f"|x| must be >= 0, got {r}")
    if r == 0.0:
        return 0.0
    P_LO, P_HI = 1e-7, 1e5
    lo, hi = max(a, P_LO), min(b, P_HI)
    c4 = c4_constant(params)
    sphere = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    total = 0.0
    if lo < hi:
        edges = np.geomspace(lo, hi, panels + 1)
        gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
        left, right = edges[:-1], edges[1:]
        mid = 0.5 * (left + right)[:, None]
        half = 0.5 * (right - left)[:, None]
        p = mid + half * gl_x[None, :]
        w = half * gl_w[None, :]
        integrand = (1.0 - _angular_average(N, p * r)) * p ** (-1.0 - 2.0 * H)
        total += float((w * integrand).sum())
    if math.isinf(b) and P_HI > lo:
        total += P_HI ** (-2.0 * H) / (2.0 * H)
    return c4 ** 2 * sphere * 2.0 * total


class EmpiricalCovariance(NamedTuple):
    cov: np.ndarray
    se: np.ndarray
    replicas: int


def empirical_covariance(ensemble):
    """Unbiased sample covariance of an ensemble with per-entry SEs.

    Accepts a list of FieldSample over identical points, or a values
    matrix (n_points, n_replicas).  SE uses the Gaussian fourth-moment
    formula var(C_ij) = (C_ii C_jj + C_ij^2)/(R-1).
    """
    if isinstance(ensemble, np.ndarray):
        V = ensemble
    else:
        samples = list(ensemble)
        if len(samples) < 2:
            raise DomainError("need >= 2 replicas")
        pts0 = samples[0].points
        for s in samples[1:]:
            if s.points.shape != pts0.shape or not np.array_equal(
                    s.points, pts0):
                raise DomainError("replicas must share an identical point list")
        V = np.column_stack([s.values for s in samples])
    R = V.shape[1]
    if R < 2:
        raise DomainError("need >= 2 replicas")
    centered = V - V.mean(axis=1, keepdims=True)
    cov = (centered @ centered.T) / (R - 1)
    d = np.diag(cov)
    se = np.sqrt(np.maximum(np.outer(d, d) + cov ** 2, 0.0) / (R - 1))
    return EmpiricalCovariance(cov=cov, se=se, replicas=R)


def sidecar_path(path):
    """Metadata file that travels with a sample CSV."""
    return str(path) + ".meta.json"


def save_field_csv(sample, path):
    """Write a sample as CSV (x1..xN, value) plus a metadata sidecar.

    The sidecar records everything needed to replay the run: method, seed,
    replica, model parameters, truncation, band, and frequency grid.  For
    band-limited spectral samples it also stores the deterministic
    quadrature variance at unit radius, so additivity checks downstream
    never resample.  Reruns are byte-identical (17-significant-digit CSV,
    LF endings, sorted JSON keys).
    """
    pts, vals = sample.points, sample.values
    n_dim = pts.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{k + 1}" for k in range(n_dim)] + ["value"])
        for i in range(pts.shape[0]):
            writer.writerow(["%.17g" % c for c in pts[i]]
                            + ["%.17g" % vals[i]])
    meta = {
        "method": sample.method,
        "seed": int(sample.seed),
        "replica": int(sample.replica),
        "params": {"N": sample.params.N, "H": sample.params.H},
        "truncation": (list(sample.truncation)
                       if sample.truncation is not None else None),
        "band": None,
        "grid": None,
    }
    if sample.band is not None:
        a, b = sample.band
        meta["band"] = [a, "inf" if math.isinf(b) else b]
        meta["variance_at_unit_radius"] = variance_quadrature(
            sample.params, 1.0, band=(a, b))
    if sample.freq_grid is not None:
        g = sample.freq_grid
        meta["grid"] = {"shells": g.shells, "p_min": g.p_min,
                        "p_max": g.p_max}
    with open(sidecar_path(path), "w", newline="") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_field_csv(path):
    """Rebuild a FieldSample from a CSV written by save_field_csv."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][-1] != "value":
        raise ConfigError(f"not a field sample CSV: {path}")
    data = np.array([[float(v) for v in row] for row in rows[1:]],
                    dtype=np.float64)
    if data.size == 0:
        data = data.reshape(0, len(rows[0]))
    with open(sidecar_path(path)) as fh:
        meta = json.load(fh)
    params = ModelParams(N=int(meta["params"]["N"]),
                         H=float(meta["params"]["H"]))
    band = meta.get("band")
    if band is not None:
        band = (float(band[0]),
                math.inf if band[1] == "inf" else float(band[1]))
    grid = meta.get("grid")
    if grid is not None:
        grid = FreqGrid(shells=int(grid["shells"]),
                        p_min=float(grid["p_min"]),
                        p_max=float(grid["p_max"]))
    trunc = meta.get("truncation")
    return FieldSample(
        params=params, points=data[:, :-1], values=data[:, -1],
        method=meta["method"], seed=int(meta["seed"]),
        truncation=tuple(trunc) if trunc is not None else None,
        freq_grid=grid, replica=int(meta.get("replica", 0)), band=band)
