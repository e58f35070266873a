"""Covariance and radial kernels against the quadrature oracle, the
golden fixture, and the exact invariances of the covariance itself."""
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracfield.errors import DomainError
from fracfield.kernel import (ModelParams, RadialKernelSpec, covariance,
                              covariance_reduced, kernel_closed_form,
                              kernel_quadrature, kink_profile, radial_kernel,
                              radial_kernel_matrix, read_golden_csv)

GOLDEN = os.path.join(os.path.dirname(__file__), "data", "golden_kernel.csv")


def test_model_params_validation():
    ModelParams(N=2, H=0.5)
    with pytest.raises(DomainError):
        ModelParams(N=2, H=0.0)
    with pytest.raises(DomainError):
        ModelParams(N=2, H=1.0)
    with pytest.raises(DomainError):
        ModelParams(N=0, H=0.5)


def test_covariance_basics():
    p = ModelParams(N=2, H=0.5)
    x = np.array([0.3, 0.4])
    y = np.array([-0.1, 0.2])
    # variance on the diagonal: |x|^{2H}
    assert covariance(x, x, p) == pytest.approx(0.5, abs=1e-15)
    # exact zero against the origin
    assert covariance(np.zeros(2), y, p) == 0.0
    # symmetry
    assert covariance(x, y, p) == covariance(y, x, p)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(-1.0, 1.0),
       st.floats(0.1, 0.9))
def test_reduced_matches_vector_form(r, s, t, H):
    """covariance_reduced(r,s,t) is the covariance of any point pair with
    radii r,s and angle cosine t — checked against an explicit pair."""
    p = ModelParams(N=2, H=H)
    x = np.array([r, 0.0])
    y = np.array([s * t, s * math.sqrt(max(0.0, 1.0 - t * t))])
    want = covariance(x, y, p)
    got = covariance_reduced(r, s, t, p)
    assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_kernel_exact_zero_and_symmetry():
    spec = RadialKernelSpec(params=ModelParams(N=3, H=0.3), m=2)
    assert kernel_closed_form(spec, 0.0, 0.7) == 0.0
    assert kernel_closed_form(spec, 0.4, 0.0) == 0.0
    a = kernel_closed_form(spec, 0.8, 0.35)
    b = kernel_closed_form(spec, 0.35, 0.8)
    assert a == b


def test_kernel_domain_errors():
    spec = RadialKernelSpec(params=ModelParams(N=2, H=0.5), m=1)
    with pytest.raises(DomainError):
        kernel_closed_form(spec, -0.1, 0.5)
    with pytest.raises(DomainError):
        kernel_closed_form(spec, 0.5, 1.2)
    n1 = RadialKernelSpec(params=ModelParams(N=1, H=0.5), m=1)
    with pytest.raises(DomainError):
        radial_kernel(n1, 0.3, 0.4)


def test_golden_fixture():
    """Closed form against the frozen quadrature table (written at 600
    nodes; both routes carry ~1e-10 relative error, so 1e-8 is ample)."""
    rows = read_golden_csv(GOLDEN)
    assert len(rows) == 120
    by_group = {}
    for row in rows:
        by_group.setdefault((row.N, row.H, row.m), []).append(row)
    for (N, H, m), group in by_group.items():
        spec = RadialKernelSpec(params=ModelParams(N=N, H=H), m=m)
        scale = max(abs(r.b_m) for r in group)
        for row in group:
            got = kernel_closed_form(spec, row.r, row.s)
            assert abs(got - row.b_m) <= 1e-8 * scale, (N, H, m, row.r, row.s)


def test_quadrature_node_refinement():
    """The oracle itself is converged: 400 vs 600 nodes agree."""
    spec = RadialKernelSpec(params=ModelParams(N=2, H=0.75), m=3)
    a = kernel_quadrature(spec, 0.6, 0.9, nodes=400)
    b = kernel_quadrature(spec, 0.6, 0.9, nodes=600)
    assert abs(a - b) <= 1e-10 * max(abs(a), 1e-30)


def test_zonal_value_n3_diagonal():
    """b_0(r,r) for N=3, H=0.5 is 4*pi*r/2 * ... = 2*pi*r/3 * ... : at
    r=s=1/2 the angular integral is elementary and equals 2*pi/3."""
    spec = RadialKernelSpec(params=ModelParams(N=3, H=0.5), m=0)
    want = 2.0 * math.pi / 3.0
    assert kernel_closed_form(spec, 0.5, 0.5) == pytest.approx(
        want, rel=1e-12)
    assert kernel_quadrature(spec, 0.5, 0.5, nodes=400) == pytest.approx(
        want, rel=1e-12)


def test_lemma_scalings_on_random_tuples(rng):
    """Deterministic covariance identities on 1000 tuples, 1e-12:
    isotropy (rotation invariance), self-similarity in u, and the
    stationary-increment identity."""
    p = ModelParams(N=3, H=0.7)
    worst = 0.0
    for _ in range(1000):
        x, y = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
        base = covariance(x, y, p)
        scale = max(1.0, abs(base))
        # isotropy: a random rotation (QR of a Gaussian matrix)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        worst = max(worst, abs(covariance(q @ x, q @ y, p) - base) / scale)
        # self-similarity: R(ux,uy) = u^{2H} R(x,y)
        u = rng.uniform(0.1, 2.0)
        worst = max(worst, abs(covariance(u * x, u * y, p)
                               - u ** (2 * p.H) * base) / scale)
        # increments: E[(xi(x)-xi(y))^2] = |x-y|^{2H}
        incr = (covariance(x, x, p) + covariance(y, y, p) - 2.0 * base)
        want = float(np.linalg.norm(x - y) ** (2 * p.H))
        worst = max(worst, abs(incr - want) / scale)
    assert worst <= 1e-12


def test_radial_matrix_psd():
    """Gram matrices of the radial kernel are PSD up to roundoff."""
    nodes = np.linspace(0.05, 1.0, 20)
    for m in (0, 1, 4, 12):
        spec = RadialKernelSpec(params=ModelParams(N=2, H=0.5), m=m)
        K = radial_kernel_matrix(spec, nodes)
        vals = np.linalg.eigvalsh(K)
        assert vals.min() >= -1e-10 * max(vals.max(), 1e-30), m


def test_radial_matrix_matches_scalar():
    spec = RadialKernelSpec(params=ModelParams(N=3, H=0.25), m=1)
    nodes = np.array([0.2, 0.5, 0.9])
    K = radial_kernel_matrix(spec, nodes)
    for i, r in enumerate(nodes):
        for j, s in enumerate(nodes):
            assert K[i, j] == pytest.approx(radial_kernel(spec, r, s),
                                            rel=1e-12)


def test_brownian_limit_n1():
    """N=1, H=1/2, m=0 must be min(r,s) exactly."""
    spec = RadialKernelSpec(params=ModelParams(N=1, H=0.5), m=0)
    assert radial_kernel(spec, 0.3, 0.8) == pytest.approx(0.3, abs=1e-15)
    assert radial_kernel(spec, 0.9, 0.4) == pytest.approx(0.4, abs=1e-15)


def test_kink_profile_power_case():
    """N=2, H=0.3: the diagonal kink exponent is (N-1)+2H = 1.6 < 2, so
    the symmetric second difference b(rho,rho+d) - 2b(rho,rho) +
    b(rho,rho-d) is dominated by 2 g1 |d|^alpha as d -> 0.  Verify the
    predicted exponent and amplitude numerically."""
    spec = RadialKernelSpec(params=ModelParams(N=2, H=0.3), m=1)
    rho = 0.6
    prof = kink_profile(spec, rho)
    assert not prof.is_log
    assert prof.alpha == pytest.approx(1.6, abs=1e-12)

    def second_diff(d):
        return (kernel_closed_form(spec, rho, rho + d)
                - 2.0 * kernel_closed_form(spec, rho, rho)
                + kernel_closed_form(spec, rho, rho - d))

    d1, d2 = 1e-3, 1e-4
    s1, s2 = second_diff(d1), second_diff(d2)
    fitted = math.log(s1 / s2) / math.log(d1 / d2)
    assert abs(fitted - prof.alpha) < 0.05
    # amplitude: S(d)/(2 d^alpha) -> g1, contaminated O(d^{2-alpha})
    assert s2 / (2.0 * d2 ** prof.alpha) == pytest.approx(prof.g1, rel=0.05)


def test_kink_profile_log_case():
    """N=2, H=0.5 hits the degenerate integer exponent: alpha = 2 with a
    logarithm; the second difference behaves like 2 g1 d^2 ln d."""
    spec = RadialKernelSpec(params=ModelParams(N=2, H=0.5), m=0)
    rho = 0.5
    prof = kink_profile(spec, rho)
    assert prof.is_log
    assert prof.alpha == pytest.approx(2.0, abs=1e-12)
    d = 1e-5
    s = (kernel_closed_form(spec, rho, rho + d)
         - 2.0 * kernel_closed_form(spec, rho, rho)
         + kernel_closed_form(spec, rho, rho - d))
    # analytic d^2 part enters at relative O(1/ln d) ~ 9%
    assert s / (2.0 * d * d * math.log(d)) == pytest.approx(prof.g1,
                                                            rel=0.15)
