"""Increment clouds, their statistics, the modulus statistic, and the
schedule audits.  Everything here is trend/corridor monitoring at fixed
seeds — the asymptotic statements themselves live far beyond desk scale."""
import math

import numpy as np
import pytest

from fracfield.errors import DomainError, ResolutionError
from fracfield.field import FieldSample, cholesky_synthesize, kl_ensemble
from fracfield.kernel import ModelParams
from fracfield import limits
from fracfield.limits import (KlFieldSource, build_cloud, cloud_stats,
                              enter_stat, functional_sup,
                              modulus_statistic, theorem_conditions)
from fracfield import rkhs


def polar_grid(radii=(0.35, 0.7, 0.98), n_ang=8):
    ang = 2.0 * math.pi * np.arange(n_ang) / n_ang
    return np.concatenate([
        np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
        for r in radii])


@pytest.fixture(scope="module")
def source2(p2, eigs_n2):
    return KlFieldSource(params=p2, eigensystems=eigs_n2,
                         truncation=(4, 8), seed=2025)


def test_h_values():
    u = math.exp(-math.exp(2.0))
    assert limits._h_of("local_lil", u, 2) == pytest.approx(2.0,
                                                            abs=1e-14)
    assert limits._h_of("global_lil", math.exp(math.e), 2) == \
        pytest.approx(1.0, abs=1e-14)
    assert limits._h_of("levy", 0.25, 3) == pytest.approx(
        3.0 * math.log(4.0), rel=1e-14)


def test_h_domain_errors():
    with pytest.raises(DomainError):
        limits._h_of("local_lil", 0.5, 2)     # needs u < 1/e
    with pytest.raises(DomainError):
        limits._h_of("local_lil", 1.2, 2)
    with pytest.raises(DomainError):
        limits._h_of("global_lil", 2.0, 2)    # needs t > e
    with pytest.raises(DomainError):
        limits._h_of("levy", 1.0, 2)


def test_levy_lattice_geometry():
    pts = limits._levy_lattice(0.5, 2)
    assert pts.shape == (13, 2)                     # spacing 1/4, radius 1/2
    assert np.linalg.norm(pts, axis=1).max() <= 0.5 + 1e-12
    # spacing is u/2 on each axis
    xs = np.unique(pts[:, 0])
    assert np.allclose(np.diff(xs), 0.25)


def test_build_cloud_structure(source2):
    grid = polar_grid()
    clouds = build_cloud("local_lil", [0.3, 0.2], source2, grid)
    assert len(clouds) == 2
    c = clouds[0]
    assert len(c.members) == 1 and np.all(c.members[0].y == 0.0)
    h = math.log(math.log(1.0 / 0.3))
    assert c.normalization.h == pytest.approx(h, rel=1e-14)
    assert c.normalization.denominator == pytest.approx(
        math.sqrt(2 * h) * 0.3 ** 0.5, rel=1e-14)
    # values are exactly raw/denominator
    m = c.members[0]
    assert np.array_equal(m.values, m.raw / c.normalization.denominator)

    g = build_cloud("global_lil", [math.exp(2.0)], source2, grid)[0]
    assert g.normalization.u == 1.0
    assert g.normalization.denominator == pytest.approx(
        math.sqrt(2.0 * math.log(2.0)), rel=1e-14)


def test_build_cloud_schedule_validation(source2):
    grid = polar_grid()
    with pytest.raises(DomainError):
        build_cloud("local_lil", [], source2, grid)
    with pytest.raises(DomainError):
        build_cloud("local_lil", [0.2, 0.3], source2, grid)   # h decreasing
    with pytest.raises(DomainError):
        build_cloud("lil", [0.2], source2, grid)


def test_cloud_bit_recompute(source2):
    grid = polar_grid()
    a = build_cloud("levy", [0.25], source2, grid, member_cap=16)[0]
    b = build_cloud("levy", [0.25], source2, grid, member_cap=16)[0]
    assert len(a.members) == len(b.members) == 16
    for ma, mb in zip(a.members, b.members):
        assert np.array_equal(ma.y, mb.y)
        assert np.array_equal(ma.raw, mb.raw)
        assert np.array_equal(ma.values, mb.values)


def test_levy_member_cap_subsample(source2):
    grid = polar_grid()
    full = build_cloud("levy", [0.25], source2, grid, member_cap=10 ** 9)[0]
    capped = build_cloud("levy", [0.25], source2, grid, member_cap=20)[0]
    assert len(capped.members) == 20 < len(full.members)
    full_ys = {tuple(m.y) for m in full.members}
    assert all(tuple(m.y) in full_ys for m in capped.members)


def test_member_variance_against_truncated_covariance(p2, eigs_n2):
    """E[eta(x)^2] = trunc-cov(ux,ux)/denom^2 for the local example;
    Monte Carlo over source replicas within 5 SE."""
    u = 0.2
    x = np.array([[0.7, 0.35]])
    h = math.log(math.log(1.0 / u))
    denom = math.sqrt(2.0 * h) * u ** p2.H
    R = 3000
    ens = kl_ensemble(p2, eigs_n2, (4, 8), u * x, seed=606, n_replicas=R)
    vals = ens[0, :] / denom
    var_emp = float(vals @ vals) / R        # mean is exactly zero
    from fracfield.field import kl_theoretical_covariance
    want = float(kl_theoretical_covariance(p2, eigs_n2, (4, 8),
                                           u * x)[0, 0]) / denom ** 2
    se = want * math.sqrt(2.0 / (R - 1))
    assert abs(var_emp - want) <= 5.0 * se


class _StubSource:
    """Deterministic source wrapping an explicit function of position."""

    def __init__(self, params, fn, seed=0):
        self.params = params
        self.fn = fn
        self.seed = seed

    def evaluate(self, points):
        return self.fn(np.atleast_2d(np.asarray(points, dtype=np.float64)))


def test_attract_zero_member_exact(p2, eigs_n2):
    src = _StubSource(p2, lambda pts: np.zeros(pts.shape[0]))
    cloud = build_cloud("global_lil", [math.exp(2.0)], src, polar_grid())[0]
    st = limits.attract_stat(cloud, src, eigs_n2, (4, 8))
    assert st.excess == 0.0 and st.supdist == 0.0


def test_attract_inside_ball_member_exact(p2, eigs_n2):
    """A member that is 0.5x a unit-norm element projects to itself:
    both surrogates vanish identically (the designed sandwich floor)."""
    rep = rkhs.representer(np.array([0.45, 0.25]), eigs_n2, (4, 8))
    nrm = rkhs.strassen_norm(rep, eigs_n2)
    t = math.exp(2.0)
    denom = math.sqrt(2.0 * math.log(math.log(t)))

    def fn(pts):
        return denom * 0.5 / nrm * rkhs.synthesize(rep, eigs_n2, pts)

    src = _StubSource(p2, fn)
    cloud = build_cloud("global_lil", [t], src, polar_grid())[0]
    st = limits.attract_stat(cloud, src, eigs_n2, (4, 8))
    assert st.excess == 0.0 and st.supdist == 0.0
    # sandwich: an inflated copy must trip both surrogates
    src2 = _StubSource(p2, lambda pts: 6.0 * fn(pts))
    cloud2 = build_cloud("global_lil", [t], src2, polar_grid())[0]
    st2 = limits.attract_stat(cloud2, src2, eigs_n2, (4, 8))
    assert st2.excess > 0.0 and st2.supdist > 0.0


def test_enter_exact_cases(p2, eigs_n2):
    rep = rkhs.representer(np.array([0.45, 0.25]), eigs_n2, (4, 8))
    nrm = rkhs.strassen_norm(rep, eigs_n2)
    half = rkhs.RkhsFunction(params=p2, truncation=(4, 8),
                             coeffs={k: 0.5 * v / nrm
                                     for k, v in rep.coeffs.items()})
    t = math.exp(2.0)
    denom = math.sqrt(2.0 * math.log(math.log(t)))
    src = _StubSource(
        p2, lambda pts: denom * rkhs.synthesize(half, eigs_n2, pts))
    grid = polar_grid()
    cloud = build_cloud("global_lil", [t], src, grid)[0]
    # the cloud's single member IS the target, up to the multiply/divide
    # round trip through the normalization constant
    assert enter_stat(cloud, half, eigs_n2) <= 1e-13
    # zero target on a single-member cloud reduces to functional_sup
    zero = rkhs.RkhsFunction(params=p2, truncation=(4, 8), coeffs={})
    assert enter_stat(cloud, zero, eigs_n2) == functional_sup(cloud)
    # norm >= 1 targets are rejected
    unit = rkhs.RkhsFunction(params=p2, truncation=(4, 8),
                             coeffs={k: v / nrm
                                     for k, v in rep.coeffs.items()})
    with pytest.raises(DomainError):
        enter_stat(cloud, unit, eigs_n2)


def test_cloud_stats_fields(source2, eigs_n2):
    cloud = build_cloud("local_lil", [0.25], source2, polar_grid())[0]
    st = cloud_stats(cloud, source2, eigs_n2, (4, 8))
    assert st.example == "local_lil" and st.scale == 0.25
    assert st.enter_dist is None
    assert st.functional_sup == functional_sup(cloud)


def test_levy_attract_trend_and_enter_min(p2, eigs_n2, source2):
    """Desk-scale trend: per-member excess medians sit at zero (members
    live inside the ball), the sup excess decreases, and the running
    minimum of enter_stat decreases across the coarse schedule."""
    grid = polar_grid()
    schedule = [0.45, 0.3, 0.2, 0.125]
    clouds = build_cloud("levy", schedule, source2, grid, member_cap=48)
    rep = rkhs.representer(np.array([0.45, 0.25]), eigs_n2, (4, 8))
    nrm = rkhs.strassen_norm(rep, eigs_n2)
    target = rkhs.RkhsFunction(params=p2, truncation=(4, 8),
                               coeffs={k: 0.7 * v / nrm
                                       for k, v in rep.coeffs.items()})
    sup_excesses, medians, enters = [], [], []
    for cloud in clouds:
        st = limits.attract_stat(cloud, source2, eigs_n2, (4, 8))
        sup_excesses.append(st.excess)
        medians.append(float(np.median(st.member_excess)))
        enters.append(enter_stat(cloud, target, eigs_n2))
    assert all(b <= a for a, b in zip(medians, medians[1:]))
    assert sup_excesses[-1] < sup_excesses[0]
    running = np.minimum.accumulate(enters)
    assert all(b <= a for a, b in zip(running, running[1:]))
    assert running[-1] < enters[0]


def test_modulus_linear_field_exact(p2):
    """xi = x1 on a lattice: the sup increment at offset norm u is u
    itself, so the statistic is u / (sqrt(2N log 1/u) u^H) exactly."""
    delta = 0.05
    axis = np.arange(-20, 21) * delta
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    pts = pts[np.linalg.norm(pts, axis=1) <= 1.0 + 1e-12]
    sample = FieldSample(params=p2, points=pts, values=pts[:, 0],
                         method="cholesky", seed=0)
    u = 0.1
    got = modulus_statistic(sample, u)
    want = u / (math.sqrt(4.0 * math.log(1.0 / u)) * u ** 0.5)
    assert got == pytest.approx(want, rel=1e-12)
    assert want == pytest.approx(0.104199, abs=5e-7)


def test_modulus_constant_field_zero(p2):
    delta = 0.1
    axis = np.arange(-5, 6) * delta
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    sample = FieldSample(params=p2, points=pts,
                         values=np.full(pts.shape[0], 3.7),
                         method="cholesky", seed=0)
    assert modulus_statistic(sample, 0.2) == 0.0


def test_modulus_resolution_errors(p2):
    delta = 0.05
    axis = np.arange(-10, 11) * delta
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    sample = FieldSample(params=p2, points=pts, values=pts[:, 1],
                         method="cholesky", seed=0)
    with pytest.raises(ResolutionError):
        modulus_statistic(sample, 0.07)       # no lattice vector has norm .07
    # degenerate (single-row) grid
    row = FieldSample(params=p2,
                      points=np.column_stack([axis, np.zeros_like(axis)]),
                      values=axis, method="cholesky", seed=0)
    with pytest.raises(ResolutionError):
        modulus_statistic(row, 0.2)
    with pytest.raises(DomainError):
        modulus_statistic(sample, 1.5)


def test_modulus_bit_recompute(p2):
    pts = polar_grid()  # not a lattice: must raise, same way, twice
    sample = cholesky_synthesize(p2, pts, seed=4)
    with pytest.raises(ResolutionError):
        modulus_statistic(sample, 0.25)
    with pytest.raises(ResolutionError):
        modulus_statistic(sample, 0.25)


def test_theorem_audits():
    local = theorem_conditions("local_lil", [0.3, 0.2, 0.125, 0.08])
    assert local.h_increasing and local.density_bounded
    assert local.h_form == "log log 1/u"
    assert local.density_values[0] == pytest.approx(
        1.0 / math.log(1.0 / 0.3), rel=1e-14)
    glob = theorem_conditions("global_lil", [10.0, 100.0, 1000.0])
    assert glob.h_increasing and glob.density_bounded
    levy = theorem_conditions("levy", [2 ** -3, 2 ** -4, 2 ** -5], N=2)
    assert levy.h_increasing and levy.density_bounded
    # lattice count * u^N stays within one decade here
    spread = max(levy.density_values) / min(levy.density_values)
    assert spread < 2.0
    with pytest.raises(DomainError):
        theorem_conditions("lil", [0.1])


def test_source_evaluate_deterministic(source2):
    pts = polar_grid()
    a = source2.evaluate(pts)
    b = source2.evaluate(pts)
    assert np.array_equal(a, b)
