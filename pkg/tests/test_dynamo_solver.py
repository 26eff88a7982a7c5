import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from fluxknot import dynamo_solver as dyn
from fluxknot.errors import DomainError, SolenoidalError, UnphysicalRadiusError, ValidityBoundaryError

S = np.linspace(0.0, 10.0, 41)


def test_resonance_and_frequencies():
    assert dyn.resonance_torsion(2.0) == -0.5
    assert dyn.resonance_torsion(1.0) == -1.0
    with pytest.raises(DomainError):
        dyn.resonance_torsion(0.0)
    for R in (0.5, 1.0, 3.0):
        rel = dyn.frequency_operator_relation(dyn.resonance_torsion(R), R, 1.7)
        assert rel.ratio == pytest.approx(1.0, abs=1e-15)
        assert rel.operator_factor == pytest.approx(-1.7 * R)
    assert dyn.frequency_operator_relation(0.0, 2.0).omega_theta == 0.0
    assert dyn.frequency_operator_relation(0.25, 2.0, 1.0).omega_theta == -0.5
    # tau0 = -1 is cancelled by a linking density of -1 / (2 pi)
    assert 2 * math.pi * dyn.linking_density(-1.0) == pytest.approx(-1.0)


def test_radius_profile_example():
    prof = dyn.radius_profile(dyn.DynamoParams(lam=0.5, A0=-0.1, v3=1.0, R0=1.0), S)
    assert np.allclose(prof.R_s, -0.1 * np.exp(-0.25 * S), atol=1e-15)
    assert prof.R_inf == pytest.approx(0.6, abs=1e-15)
    assert np.all(np.diff(prof.R) < 0) and np.all(prof.R > prof.R_inf)
    assert not prof.excluded_branch
    assert prof.decay_factor == pytest.approx(2.0)


def test_radius_profile_matches_ode():
    p = dyn.DynamoParams(lam=0.8, v3=1.3, A0=-0.2, R0=1.5)
    sol = solve_ivp(lambda s, y: [y[1], -p.lam * y[1] / (2 * p.v3)], (0, 10), [p.R0, p.A0],
                    t_eval=S, rtol=1e-13, atol=1e-14, method="DOP853")
    prof = dyn.radius_profile(p, S)
    assert np.allclose(prof.R, sol.y[0], atol=1e-11)
    # integrating-factor closed form, written independently
    r = p.lam / (2 * p.v3)
    assert np.allclose(prof.R, p.R0 + p.A0 / r * (1 - np.exp(-r * S)), atol=1e-12, rtol=0)


def test_radius_profile_marginal_and_limit():
    p0 = dyn.radius_profile(dyn.DynamoParams(lam=0.0, A0=-0.05), S)
    assert np.allclose(p0.R_s, -0.05) and np.allclose(p0.R, 1 - 0.05 * S)
    tiny = dyn.radius_profile(dyn.DynamoParams(lam=1e-8, A0=-0.05), S)
    assert np.allclose(tiny.R, 1 - 0.05 * S, atol=1e-6)


def test_radius_profile_errors():
    with pytest.raises(UnphysicalRadiusError, match="shrink-through-zero") as exc:
        dyn.radius_profile(dyn.DynamoParams(lam=0.1, A0=-0.5), S)
    assert 0 < exc.value.s_critical <= 10
    assert dyn.radius_profile(dyn.DynamoParams(lam=0.5, A0=0.1), S).excluded_branch
    with pytest.raises(DomainError):
        dyn.radius_profile(dyn.DynamoParams(lam=-0.1), S)
    with pytest.raises(DomainError):
        dyn.DynamoParams(v1=0.0)


@given(lam=st.floats(0.01, 2.0), A0=st.floats(-0.2, 0.2), v1=st.floats(0.5, 2.0), v3=st.floats(0.5, 2.0))
@settings(max_examples=30, deadline=None)
def test_exact_field_residual(lam, A0, v1, v3):
    p = dyn.DynamoParams(lam=lam, A0=A0, v1=v1, v3=v3)
    sol = dyn.solve(p, S, "exact")
    B = sol.B3(S)
    assert np.max(np.abs(sol.B3.residual(S))) < 1e-10 * max(1.0, np.max(np.abs(B)))


def test_printed_field_residual_is_Rs_B3():
    p = dyn.DynamoParams()
    prof = dyn.radius_profile(p, S)
    f = dyn.field_solution(p, prof, "as-printed")
    assert np.allclose(f.residual(S, 0.3), prof.R_s * f(S, 0.3), atol=1e-12)


@given(t=st.floats(-3, 3), d=st.floats(-3, 3))
def test_time_scaling(t, d):
    p = dyn.DynamoParams(lam=0.7)
    for mode in dyn.FIELD_MODES:
        f = dyn.solve(p, S, mode).B3
        assert np.allclose(f(S, t + d), math.exp(p.lam * d) * f(S, t), rtol=1e-14, atol=0)


def test_constant_radius_limit():
    p = dyn.DynamoParams(lam=0.4, A0=0.0, R0=1.3, B0=2.0, v1=1.7)
    t = 0.9
    closed = 2.0 * np.exp(0.4 * (t - 1.3 * S / 1.7))
    for mode in dyn.FIELD_MODES:
        assert np.allclose(dyn.solve(p, S, mode).B3(S, t), closed, rtol=1e-13)


def test_generic_profile_by_quadrature():
    p = dyn.DynamoParams(lam=0.6, v1=1.2)
    R = lambda s: 1.0 + 0.2 * np.sin(s)
    Rs = lambda s: 0.2 * np.cos(s)
    f = dyn.field_solution(p, (R, Rs), "exact")
    assert np.max(np.abs(f.residual(S))) < 1e-10


def test_growth_rate():
    assert dyn.growth_rate_from_constraint(1.0, 0.5, math.pi / 2) == pytest.approx(0.5)
    assert dyn.growth_rate_from_constraint(1.0, 0.0, 0.3) == 0.0
    with pytest.raises(ValidityBoundaryError, match="tube-validity boundary"):
        dyn.growth_rate_from_constraint(2.0, 0.5, 0.0)


@given(R=st.floats(0.1, 1.5), k=st.floats(-1.0, 1.0), th=st.floats(0, 2 * math.pi))
def test_growth_requires_curvature(R, k, th):
    den = 1 - R * k * math.cos(th)
    if abs(den) < 1e-6:
        return
    lam = dyn.growth_rate_from_constraint(R, k, th)
    if lam > 0:
        assert k > 0 and den > 0 or k < 0 and den < 0
    assert dyn.classify(lam) == ("grow" if lam > 0 else "decay" if lam < 0 else "marginal")


def test_growth_sensitivity():
    for th in (0.0, 1.0, 2.5):
        g = dyn.growth_rate_sensitivity(1.0, 0.5, th)
        h = 1e-6
        fd = (dyn.growth_rate_from_constraint(1 + h, 0.5, th)
              - dyn.growth_rate_from_constraint(1 - h, 0.5, th)) / (2 * h)
        assert g.dlam_dR == pytest.approx(fd, rel=1e-7)
        assert g.shrinking_enhances_growth == (math.cos(th) < 0)


def test_induction_system_reduction():
    p = dyn.DynamoParams(lam=0.5, v1=1.0, v3=1.0)
    prof = dyn.radius_profile(p, S)
    for s in (0.0, 2.5, 7.0):
        r = dyn.induction_scalar_system(p, prof, s)
        assert abs(r.eq67) < 1e-12 and abs(r.reduced70) < 1e-12
        assert abs(r.eq68) < 1e-10


def test_induction_constant_radius_eq67():
    p = dyn.DynamoParams(A0=0.0)
    prof = dyn.radius_profile(p, S)
    r = dyn.induction_scalar_system(p, prof, 1.0, B1=lambda s, t: 3.0 + s)
    assert r.eq67 == 0.0


def test_induction_eq69_consistent_with_growth_rate():
    kappa, R0, th = 0.5, 1.0, math.pi / 2
    lam = dyn.growth_rate_from_constraint(R0, kappa, th)
    p = dyn.DynamoParams(lam=lam, kappa0=kappa, R0=R0, A0=0.0, theta=th)
    r = dyn.induction_scalar_system(p, dyn.radius_profile(p, S), 0.0)
    assert abs(r.reduced71) < 1e-15 and abs(r.eq69) < 1e-15


def test_induction_residual_relaxation():
    p = dyn.DynamoParams()
    prof = dyn.radius_profile(p, S)
    exact = dyn.field_solution(p, prof, "exact")
    pert = lambda s, t: np.sin(3 * s) + 0.5
    res = [abs(dyn.induction_scalar_system(p, prof, 1.3, B3=lambda s, t, d=d: exact(s, t) + d * pert(s, t)).eq68)
           for d in (1.0, 0.5, 0.25, 0.125, 0.0625)]
    assert all(b < a for a, b in zip(res, res[1:]))
    assert res[0] > 1e-3


def test_discrepancy_summary():
    summ = dyn.discrepancy_summary(dyn.DynamoParams(), S)
    assert summ["radius_decay"]["factor"] == pytest.approx(2.0)
    assert summ["radius_decay"]["verdict"] == "inconsistent"
    ft = summ["field_transport"]
    assert ft["max_abs_residual_exact"] < 1e-10 and ft["residual_minus_Rs_B3"] < 1e-10
    assert ft["max_abs_residual_printed"] > 1e-3


# -- curl identity -------------------------------------------------------------------


def test_central_weights():
    assert np.allclose(dyn.central_weights(2), [0.5])
    assert np.allclose(dyn.central_weights(4), [2 / 3, -1 / 12])
    with pytest.raises(DomainError):
        dyn.central_weights(3)


def test_curl_parallel_and_rotation():
    f = dyn.random_solenoidal_field(np.random.default_rng(0))
    assert dyn.curl_advective_identity_check(f, f).max_deviation < 1e-8
    rot = lambda x, y, z: np.array([-y, x, 0 * z])
    axial = lambda x, y, z: np.array([0 * x, 0 * y, 1 + 0 * z])
    grid = dyn.CartesianGrid(16, -1.0, 1.0, periodic=False)
    res = dyn.curl_advective_identity_check(rot, axial, grid, order=2)
    assert res.max_deviation < 1e-8


def test_curl_random_fields():
    rng = np.random.default_rng(42)
    v, B = dyn.random_solenoidal_field(rng), dyn.random_solenoidal_field(rng)
    res = dyn.curl_advective_identity_check(v, B, dyn.CartesianGrid(32))
    assert res.max_deviation < 1e-6 and res.max_divergence < 1e-8


def test_curl_second_order_convergence():
    rng = np.random.default_rng(1)
    v, B = dyn.random_solenoidal_field(rng), dyn.random_solenoidal_field(rng)
    e = [dyn.curl_advective_identity_check(v, B, dyn.CartesianGrid(n), order=2).max_deviation
         for n in (16, 32)]
    assert math.log2(e[0] / e[1]) >= 1.8


def test_curl_rejects_divergent():
    div = lambda x, y, z: np.array([np.sin(x), 0 * y, 0 * z])
    with pytest.raises(SolenoidalError):
        dyn.curl_advective_identity_check(div, div, dyn.CartesianGrid(16))


def test_abc_field_is_solenoidal():
    res = dyn.curl_advective_identity_check(dyn.abc_field(1, 0.7, 0.4), dyn.abc_field(0.3, 1, 0.2),
                                            dyn.CartesianGrid(16))
    assert res.max_divergence < 1e-12
