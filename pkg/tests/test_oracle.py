import cmath
import math

import numpy as np
import pytest

from nudirac.algebra import Poly, RationalFunction
from nudirac.dirac import DecoupledODE, decouple
from nudirac.models import (
    NonPTParams,
    PTLinearParams,
    nonpt_ode,
    pt_model,
)
from nudirac.oracle import (
    Discretization,
    normalize_quadrature,
    ode_residual,
    solve_linear_pencil,
    solve_quadratic_pencil,
)


def _const_ode(Q0_poly, Q2_poly, v_f=Poly((1,))):
    one = RationalFunction.from_poly
    return DecoupledODE(
        v_f=v_f,
        P=one(Poly((0,))),
        Q0=one(Q0_poly),
        Q1=one(Poly((0,))),
        Q2=one(Q2_poly),
    )


def test_discretization_validation():
    with pytest.raises(ValueError):
        Discretization(domain=(1.0, 0.0))
    with pytest.raises(ValueError):
        Discretization(domain=(0.0, 1.0), N=16)
    Discretization(domain=(0.0, 1.0), N=16, allow_small=True)
    with pytest.raises(ValueError):
        Discretization(domain=(0.0, 1.0), scheme="spectral-element")


def test_domain_must_clear_the_singularity():
    ode = decouple(pt_model(PTLinearParams(a=1, b=2, gamma=2, omega=2)))
    disc = Discretization(domain=(-0.6, 30.0), N=64)
    with pytest.raises(ValueError, match="v_f zero"):
        solve_quadratic_pencil(ode, disc)


def test_linear_pencil_recovers_oscillator_levels():
    # -u'' + z^2 u = Lambda u on a wide box: Lambda = 2n+1.  In pencil form
    # u'' + (-z^2) u = E^2 (-1) u, so E^2 = -(2n+1); this validates the
    # assembly and eigensolver on a problem where wall truncation is benign.
    ode = _const_ode(Poly((0, 0, -1)), Poly((1,)))
    for scheme, N in (("fd", 320), ("cheb", 220)):
        disc = Discretization(domain=(-9.0, 9.0), N=N, scheme=scheme)
        spec = solve_linear_pencil(ode, disc)
        kept = spec.kept_levels()
        lam = sorted((lv.E**2).real for lv in kept)[:4]
        for got, want in zip(lam, (1, 3, 5, 7)):
            assert abs(got - want) < 1.5e-3 * want, (scheme, lam)


def test_quadratic_pencil_recovers_engineered_levels():
    # (d2 - z^2) u + 2E u - E^2 u = 0  <=>  -u'' + z^2 u = (2E - E^2)(-1)...
    # pick L1 = 2, L2 = -1: quadratic eigenvalues satisfy E^2 - 2E = -(2n+1),
    # i.e. E = 1 +/- i sqrt(2n); validates companion linearization on a
    # well-posed box problem with complex pairs
    ode = DecoupledODE(
        v_f=Poly((1,)),
        P=RationalFunction.from_poly(Poly((0,))),
        Q0=RationalFunction.from_poly(Poly((0, 0, -1))),
        Q1=RationalFunction.from_poly(Poly((2,))),
        Q2=RationalFunction.from_poly(Poly((-1,))),
    )
    disc = Discretization(domain=(-9.0, 9.0), N=180, scheme="cheb")
    spec = solve_quadratic_pencil(ode, disc)
    got = sorted(spec.kept_levels(), key=lambda lv: abs(lv.E - 1))[:5]
    vals = sorted(round(abs(lv.E - 1) ** 2) for lv in got)
    assert vals[0] == 0
    assert 2 in vals and 4 in vals
    for lv in got:
        target = 1 + 1j * math.copysign(math.sqrt(round(abs(lv.E - 1) ** 2)), lv.E.imag)
        assert abs(lv.E - target) < 2e-3


def test_scheme_agreement():
    # on a regular problem the two schemes agree tightly at production
    # resolutions (the wall-truncated singular models converge too slowly in
    # the FD resolution for a 1e-3 cross-scheme match; see the oscillator
    # case above for the solvable-input agreement and the characterization
    # test below for the singular case)
    ode = _const_ode(Poly((0, 0, -1)), Poly((1,)))
    fd = solve_linear_pencil(ode, Discretization(domain=(-9.0, 9.0), N=320, scheme="fd"))
    ch = solve_linear_pencil(ode, Discretization(domain=(-9.0, 9.0), N=220, scheme="cheb"))
    lam_fd = sorted((lv.E**2).real for lv in fd.kept_levels())[:2]
    lam_ch = sorted((lv.E**2).real for lv in ch.kept_levels())[:2]
    for a, b in zip(lam_fd, lam_ch):
        assert abs(a - b) <= 1e-3 * max(1.0, abs(a))


def test_scheme_consistency_on_wall_truncated_problem():
    # fd (graded) and cheb discretize the same truncated-wall problem; their
    # lowest levels agree at the few-percent level, limited by the
    # logarithmic layer at the singular end (documented characterization)
    params = NonPTParams(alpha=1, beta=2, gamma=2)
    ode = nonpt_ode(params)
    fd = solve_linear_pencil(ode, Discretization(domain=(-0.499, 40.0), N=1200, scheme="fd"))
    ch = solve_linear_pencil(ode, Discretization(domain=(-0.499, 40.0), N=500, scheme="cheb"))
    lam_fd = (fd.levels[0].E**2).real
    lam_ch = (ch.levels[0].E**2).real
    assert abs(lam_fd - lam_ch) <= 0.05 * max(1.0, abs(lam_fd))


def test_truncated_pencil_misses_closed_form_levels():
    # the closed-form eigenfunctions with n >= 1 diverge at the singular
    # endpoint like t^{-(2n+1)/2}; the Dirichlet-truncated pencil therefore
    # converges to a different, all-positive eps^2 spectrum.  This test
    # pins the characterization: lowest eps^2 sits above the ground value 2
    # and nothing lands near the formal eps^2 = -2 level.
    params = NonPTParams(alpha=1, beta=2, gamma=2)
    ode = nonpt_ode(params)
    disc = Discretization(domain=(-0.499, 40.0), N=600, scheme="cheb")
    spec = solve_linear_pencil(
        ode, disc, eps2_shift=params.alpha**2 + params.gamma**2 / 4
    )
    eps2 = [lv.raw for lv in spec.levels]
    assert all(e.real > 0 for e in eps2)
    assert min(e.real for e in eps2) == pytest.approx(2.29, abs=0.15)
    assert all(abs(e - (-2.0)) > 1.0 for e in eps2)


def test_ode_residual_closed_forms(pt_states, nonpt_states):
    pts = [0.05 + 0.2 * j for j in range(20)]
    for state in (pt_states[0], nonpt_states[0]):
        ode = decouple(state.model_z, state.E)
        assert ode_residual(ode, state, pts, E=state.E) < 1e-8


def test_ode_residual_rejects_imposter(nonpt_states):
    state = nonpt_states[0]
    ode = decouple(state.model_z, state.E)
    pts = [0.05 + 0.2 * j for j in range(20)]
    assert ode_residual(ode, lambda z: 1.0 + z, pts, E=state.E) > 1e-2


def test_ode_residual_guards_singular_points(nonpt_states):
    state = nonpt_states[0]
    ode = decouple(state.model_z, state.E)
    with pytest.raises(ValueError, match="v_f zero"):
        ode_residual(ode, state, [-0.4999999], E=state.E)


def test_normalize_quadrature_zero_state():
    class Zero:
        def psi1(self, x):
            return 0j

        def psi2(self, x):
            return 0j

    norms, converged, exponent = normalize_quadrature(Zero(), (5.0, 10.0))
    assert norms == [0.0, 0.0]
    assert converged is True
    assert exponent is None


def test_normalize_quadrature_plane_wave_grows_linearly():
    class PlaneWave:
        def psi1(self, x):
            return cmath.exp(1j * x)

        def psi2(self, x):
            return 0j

    norms, converged, exponent = normalize_quadrature(PlaneWave(), (10.0, 20.0, 40.0, 80.0))
    assert converged is False
    assert exponent == pytest.approx(1.0, abs=0.05)


def test_normalize_quadrature_gaussian_converges():
    class Gaussian:
        def psi1(self, x):
            return cmath.exp(-x * x)

        def psi2(self, x):
            return 0j

    norms, converged, exponent = normalize_quadrature(Gaussian(), (5.0, 10.0, 20.0))
    assert converged is True
    assert abs(norms[-1] - math.sqrt(math.pi / 2)) < 1e-6


def test_nonpt_norm_probe_growth_exponent(nonpt_states):
    norms, converged, exponent = normalize_quadrature(
        nonpt_states[0], (10.0, 20.0, 40.0, 80.0)
    )
    assert converged is False
    assert exponent == pytest.approx(1.0, abs=0.05)


def test_tiny_n_has_large_convergence_estimates():
    params = NonPTParams(alpha=1, beta=2, gamma=2)
    ode = nonpt_ode(params)
    disc = Discretization(domain=(-0.499, 40.0), N=16, scheme="fd", allow_small=True)
    spec = solve_linear_pencil(ode, disc)
    assert all(not lv.kept for lv in spec.levels[:3]) or max(
        lv.conv_estimate for lv in spec.levels[:3]
    ) > 1e-2
