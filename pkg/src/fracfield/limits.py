"""Clouds of normed increments and their attraction/entry statistics.

Three example families: the local iterated-logarithm scaling at the origin
(h = log log 1/u, single member per scale), the global one realized inside
the unit ball through self-similar rescaling (h = log log t, the t^H factor
cancels symbolically), and the modulus-of-continuity family whose members
range over a y-lattice of spacing u/2 inside the ball of radius 1-u
(h = N log 1/u).

The asymptotic theorems behind these families are far beyond desk scale;
everything here is a monitored corridor or trend at a fixed seed, not a
limit verification.  The sup-norm distance to the unit norm ball is an
infinite-dimensional program, so the module reports two documented
surrogates: the norm excess (|eta|_S - 1)+ of the member's coefficient
table, and the sup distance between that table's synthesis and its
projection onto the ball (zero exactly when the excess is zero, and an
upper bound for the distance from the representative to the ball).
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import rkhs
from .errors import CoverageError, DomainError, ResolutionError
from .field import FieldSample, RngStream, _check_points, kl_synthesize
from .kernel import ModelParams

EXAMPLES = ("local_lil", "global_lil", "levy")

TAG_SUBSAMPLE = 4


@dataclass(frozen=True)
class KlFieldSource:
    """A deterministic field: truncated synthesis with frozen coefficients.

    Evaluating twice at the same points is bit-identical, which is what
    makes cloud members exactly recomputable from raw values.
    """
    params: ModelParams
    eigensystems: tuple
    truncation: Tuple[int, int]
    seed: int
    replica: int = 0

    def __post_init__(self):
        if hasattr(self.eigensystems, "keys"):
            es_tuple = tuple(self.eigensystems[m]
                             for m in sorted(self.eigensystems))
        else:
            es_tuple = tuple(self.eigensystems)
        object.__setattr__(self, "eigensystems", es_tuple)
        object.__setattr__(self, "truncation", tuple(self.truncation))

    def evaluate(self, points) -> np.ndarray:
        sample = kl_synthesize(self.params, self.eigensystems,
                               self.truncation, points, self.seed,
                               replica=self.replica)
        return sample.values


class CloudMember(NamedTuple):
    y: np.ndarray
    u: float
    raw: np.ndarray        # field increments before normalization
    values: np.ndarray     # raw / denominator


class NormalizationRecord(NamedTuple):
    h: float
    u: float
    denominator: float


@dataclass(frozen=True)
class IncrementCloud:
    """Members (xi(y+ux) - xi(y)) / (sqrt(2h) u^H) on a shared grid."""
    example: str
    scale: float
    points: np.ndarray
    members: tuple
    normalization: NormalizationRecord

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise DomainError(f"unknown example {self.example!r}")
        if not self.normalization.denominator > 0.0:
            raise DomainError("normalization denominator must be positive")


def _h_of(example, scale, N):
    if example == "local_lil":
        if not 0.0 < scale < 1.0:
            raise DomainError(f"local scale must be in (0,1), got {scale}")
        h = math.log(math.log(1.0 / scale)) if scale < 1.0 / math.e else 0.0
        if h <= 0.0:
            raise DomainError(
                f"scale {scale} too large for the local example "
                f"(need u < 1/e so that log log 1/u > 0)")
        return h
    if example == "global_lil":
        if not scale > math.e:
            raise DomainError(
                f"global scale must exceed e, got {scale}")
        return math.log(math.log(scale))
    if not 0.0 < scale < 1.0:
        raise DomainError(f"levy scale must be in (0,1), got {scale}")
    return N * math.log(1.0 / scale)


def _levy_lattice(u, N):
    """Cartesian lattice of spacing u/2 inside the ball of radius 1-u."""
    delta = u / 2.0
    reach = 1.0 - u
    K = int(math.floor(reach / delta))
    axis = delta * np.arange(-K, K + 1)
    grids = np.meshgrid(*([axis] * N), indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids])
    keep = np.linalg.norm(pts, axis=1) <= reach + 1e-12
    return pts[keep]


def build_cloud(example, scale_schedule, source, grid,
                member_cap=256) -> list:
    """One IncrementCloud per scale.

    local_lil: the single member y=0, eta(x) = xi(ux)/(sqrt(2 log log 1/u)
    u^H).  global_lil: realized inside the unit ball by self-similarity —
    xi(tx)/(sqrt(2 log log t) t^H) has the law of xi(x)/sqrt(2 log log t),
    so the member is the rescaled field itself and t^H never appears
    numerically.  levy: one member per lattice label y (spacing u/2,
    |y| <= 1-u, deterministically subsampled to member_cap when larger).
    """
    if example not in EXAMPLES:
        raise DomainError(f"unknown example {example!r}; "
                          f"expected one of {EXAMPLES}")
    scales = [float(s) for s in scale_schedule]
    if len(scales) == 0:
        raise DomainError("empty scale schedule")
    N = source.params.N
    H = source.params.H
    pts = _check_points(grid, N)
    hs = [_h_of(example, s, N) for s in scales]
    if len(scales) > 1 and not all(b > a for a, b in zip(hs, hs[1:])):
        raise DomainError(
            "scale schedule must make h strictly increasing "
            "(decreasing u for local_lil/levy, increasing t for global_lil)")
    clouds = []
    for idx, (scale, h) in enumerate(zip(scales, hs)):
        if example == "global_lil":
            u = 1.0
            labels = np.zeros((1, N))
            denom = math.sqrt(2.0 * h)
        else:
            u = scale
            denom = math.sqrt(2.0 * h) * u ** H
            if example == "local_lil":
                labels = np.zeros((1, N))
            else:
                labels = _levy_lattice(u, N)
                if labels.shape[0] > member_cap:
                    order = np.argsort(RngStream(
                        source.seed, (TAG_SUBSAMPLE, idx)).normals(
                            labels.shape[0]))
                    labels = labels[np.sort(order[:member_cap])]
        members = []
        for y in labels:
            eval_pts = y[None, :] + u * pts
            norms = np.linalg.norm(eval_pts, axis=1)
            if norms.size and norms.max() > 1.0 + 1e-12:
                raise CoverageError(
                    f"evaluation point at radius {norms.max():.6f} falls "
                    f"outside the sampled ball (y={y}, u={u})")
            base = 0.0
            if np.any(y != 0.0):
                base = source.evaluate(y[None, :])[0]
            raw = source.evaluate(eval_pts) - base
            members.append(CloudMember(y=y, u=u, raw=raw,
                                       values=raw / denom))
        clouds.append(IncrementCloud(
            example=example, scale=scale, points=pts,
            members=tuple(members),
            normalization=NormalizationRecord(h=h, u=u, denominator=denom)))
    return clouds


class AttractStats(NamedTuple):
    excess: float          # sup over members of (|eta|_S - 1)+
    supdist: float         # sup over members of |repr - proj(repr)|_inf
    member_excess: tuple
    member_supdist: tuple


def _member_callable(cloud, source, member):
    u, y = member.u, member.y
    denom = cloud.normalization.denominator

    def f(points):
        pts = np.asarray(points, dtype=np.float64)
        eval_pts = y[None, :] + u * pts
        base = 0.0
        if np.any(y != 0.0):
            base = source.evaluate(y[None, :])[0]
        return (source.evaluate(eval_pts) - base) / denom
    return f


def attract_stat(cloud, source, eigensystems, truncation,
                 angular_size=None) -> AttractStats:
    """Per-member norm excess and projection distance, and their sups.

    Each member's coefficient table is computed on the coefficient grid;
    the sup distance compares the table's synthesis on the cloud grid with
    its ball projection (identically zero when the excess is zero).
    """
    excesses, supdists = [], []
    for member in cloud.members:
        table = rkhs.fourier_coeffs(_member_callable(cloud, source, member),
                                    eigensystems, truncation,
                                    angular_size=angular_size)
        norm = rkhs.strassen_norm(table, eigensystems)
        excess = max(norm - 1.0, 0.0)
        if excess == 0.0:
            supdist = 0.0
        else:
            rep_vals = rkhs.synthesize(table, eigensystems, cloud.points)
            supdist = (1.0 - 1.0 / norm) * float(np.abs(rep_vals).max())
        excesses.append(excess)
        supdists.append(supdist)
    return AttractStats(excess=max(excesses), supdist=max(supdists),
                        member_excess=tuple(excesses),
                        member_supdist=tuple(supdists))


def enter_stat(cloud, target: rkhs.RkhsFunction, eigensystems) -> float:
    """inf over members of the max-grid-norm |eta - target|.

    The target must lie strictly inside the unit norm ball.
    """
    norm = rkhs.strassen_norm(target, eigensystems)
    if norm >= 1.0:
        raise DomainError(
            f"entry target must satisfy |f|_S < 1, got {norm:.6f}")
    target_vals = rkhs.synthesize(target, eigensystems, cloud.points)
    best = math.inf
    for member in cloud.members:
        best = min(best, float(np.abs(member.values - target_vals).max()))
    return best


def functional_sup(cloud) -> float:
    """sup over members of the max-grid-norm of eta."""
    return max(float(np.abs(m.values).max()) for m in cloud.members)


class CloudStats(NamedTuple):
    example: str
    scale: float
    attract_excess: float
    attract_supdist: float
    enter_dist: Optional[float]
    functional_sup: float


def cloud_stats(cloud, source, eigensystems, truncation, target=None,
                angular_size=None) -> CloudStats:
    att = attract_stat(cloud, source, eigensystems, truncation,
                       angular_size=angular_size)
    ent = (enter_stat(cloud, target, eigensystems)
           if target is not None else None)
    return CloudStats(example=cloud.example, scale=cloud.scale,
                      attract_excess=att.excess,
                      attract_supdist=att.supdist,
                      enter_dist=ent,
                      functional_sup=functional_sup(cloud))


# ---------------------------------------------------------------------------
# modulus of continuity


def _lattice_spacing(coords):
    u = np.unique(coords)
    if u.size < 2:
        return None
    d = np.diff(u)
    return float(d.min())


def modulus_statistic(field: FieldSample, u, rel_tol=1e-9) -> float:
    """sup over grid pairs at offset norm u of |xi(x+y)-xi(x)|, normalized
    by sqrt(2 N log 1/u) u^H.

    The field must live on a Cartesian lattice (possibly clipped to the
    ball); offsets are lattice vectors whose norm equals u to rel_tol.
    Base points are thinned to the sublattice of spacing u/2 (or the full
    lattice when it is already coarser), the same net the increment-cloud
    construction uses: it keeps the number of pairs growing like u^{-N},
    so the normalization's N log(1/u) entropy term matches the pair count
    and the statistic is comparable across scales.
    """
    if not 0.0 < u < 1.0:
        raise DomainError(f"offset scale must be in (0,1), got {u}")
    pts = field.points
    N = pts.shape[1]
    spacings = [_lattice_spacing(pts[:, a]) for a in range(N)]
    if any(s is None for s in spacings):
        raise ResolutionError("grid is degenerate along an axis")
    delta = min(spacings)
    idx = np.rint(pts / delta).astype(np.int64)
    if np.abs(pts - idx * delta).max() > 1e-9:
        raise ResolutionError(
            f"points do not sit on a lattice of spacing {delta}")
    idx -= idx.min(axis=0)
    shape = tuple(int(k) + 1 for k in idx.max(axis=0))
    # a lattice clipped to any sensible region keeps a decent fill
    # fraction; a huge empty box means the spacing was inferred from
    # near-duplicate coordinates of a non-lattice grid
    if math.prod(shape) > max(64, 50 * pts.shape[0]):
        raise ResolutionError(
            f"points do not fill a lattice box at spacing {delta:g} "
            f"({math.prod(shape)} cells for {pts.shape[0]} points)")
    arr = np.full(shape, np.nan)
    arr[tuple(idx.T)] = field.values
    step = max(1, int(math.floor(u / (2.0 * delta) + rel_tol)))
    base = np.full(shape, np.nan)
    on_net = np.all(idx % step == 0, axis=1)
    base[tuple(idx[on_net].T)] = field.values[on_net]
    kmax = int(math.ceil(u / delta + 1.0))
    sup = 0.0
    found = False
    ranges = [range(-kmax, kmax + 1)] * N
    for kvec in np.stack(np.meshgrid(*ranges, indexing="ij"),
                         axis=-1).reshape(-1, N):
        if not np.any(kvec):
            continue
        norm = math.sqrt(float(np.dot(kvec, kvec))) * delta
        if abs(norm - u) > rel_tol * u:
            continue
        found = True
        src = tuple(slice(max(-k, 0), arr.shape[a] - max(k, 0))
                    for a, k in enumerate(kvec))
        dst = tuple(slice(max(k, 0), arr.shape[a] - max(-k, 0))
                    for a, k in enumerate(kvec))
        diff = np.abs(arr[dst] - base[src])
        if diff.size and not np.isnan(diff).all():
            sup = max(sup, float(np.nanmax(diff)))
    if not found:
        raise ResolutionError(
            f"no lattice offsets of norm {u} exist at spacing {delta}")
    denom = math.sqrt(2.0 * N * math.log(1.0 / u)) * u ** field.params.H
    return sup / denom


# ---------------------------------------------------------------------------
# symbolic schedule audit


@dataclass(frozen=True)
class TheoremAudit:
    """Closed-form audit of the schedule conditions, no Monte Carlo."""
    example: str
    scales: tuple
    h_values: tuple
    h_increasing: bool
    h_form: str
    density_form: str
    density_values: tuple
    density_bounded: bool
    notes: str


def theorem_conditions(example, scale_schedule, N=2) -> TheoremAudit:
    """Audit h-monotonicity and the scale-density comparison for a schedule.

    local/global: the scale measure has density comparable to du/u — the
    audited quantity is u·dh/du (respectively t·dh/dt), positive on the
    schedule.  levy: the lattice grows like u^{-N}; the audited quantity
    is (lattice count)·u^N, bounded above and below.
    """
    scales = tuple(float(s) for s in scale_schedule)
    hs = tuple(_h_of(example, s, N) for s in scales)
    increasing = all(b > a for a, b in zip(hs, hs[1:]))
    if example == "local_lil":
        dens = tuple(1.0 / math.log(1.0 / s) for s in scales)
        form, h_form = "du/u (times the slowly varying 1/log(1/u))", \
            "log log 1/u"
        note = ("u |dh/du| = 1/log(1/u): positive and slowly varying, so "
                "dh is comparable to du/u on the schedule")
    elif example == "global_lil":
        dens = tuple(1.0 / math.log(s) for s in scales)
        form, h_form = "dt/t (times the slowly varying 1/log t)", \
            "log log t"
        note = ("t dh/dt = 1/log t: positive and slowly varying, so dh is "
                "comparable to dt/t on the schedule")
    elif example == "levy":
        dens = tuple(_levy_lattice(s, N).shape[0] * s ** N for s in scales)
        form, h_form = "lattice count ~ u^{-N}", "N log 1/u"
        note = ("count(u) u^N stays within fixed bounds: the u/2-spacing "
                "lattice of the (1-u)-ball grows like u^{-N}")
    else:
        raise DomainError(f"unknown example {example!r}")
    positive = all(v > 0.0 for v in dens)
    spread = (max(dens) / min(dens)) if positive else math.inf
    return TheoremAudit(example=example, scales=scales, h_values=hs,
                        h_increasing=increasing, h_form=h_form,
                        density_form=form, density_values=dens,
                        density_bounded=positive and spread < 100.0,
                        notes=note)
