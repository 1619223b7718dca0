import math

import numpy as np
import pytest

from contactflow.diagnostics import (
    FIT_GRID, Cutoff, KernelSpec, NonconcentrationRow, boundary_energy_budget, contact_angle_extract, heat_kernel,
    ilmanen_residual, kernel_boundary_identity_residual, kernel_weight, monotonicity_check,
    nonconcentration_profile, smooth_step, trace_gap, truncated_kernels, wetting_flag,
)
from contactflow.energetics import make_polynomial_model, make_quartic_model
from contactflow.errors import HypothesisError, InsufficientResolutionError, ParameterError, ResolutionError
from contactflow.geometry import Channel2D, Disk2D, Interval1D
from contactflow.solver import PhaseField, frozen_record, initial_profile, run, stability_cap


# -- kernels ---------------------------------------------------------------------

def test_heat_kernel_unit_value():
    assert heat_kernel([0.3, 0.2], 0.0, [0.3, 0.2], 1 / (4 * math.pi)) == pytest.approx(1.0, abs=1e-15)


def test_heat_kernel_at_diffusion_radius():
    tau = 0.01
    x = [0.5 + 2 * math.sqrt(tau), 0.1]
    expected = (4 * math.pi * tau) ** -0.5 * math.exp(-1)
    assert heat_kernel(x, 0.0, [0.5, 0.1], tau) == pytest.approx(expected, rel=1e-14)


def test_heat_kernel_requires_past_time():
    with pytest.raises(ParameterError):
        heat_kernel([0.0, 0.0], 1.0, [0.0, 0.0], 1.0)


def test_heat_kernel_derivatives_match_differences():
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.3, 0.3, (20, 2))
    y, s, t = np.array([0.05, -0.02]), 0.2, 0.15
    kv = heat_kernel(x, t, y, s, derivatives=True)
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (heat_kernel(x + e, t, y, s) - heat_kernel(x - e, t, y, s)) / (2 * h)
        np.testing.assert_allclose(kv.grad[:, k], fd, rtol=1e-6, atol=1e-8)
        fdg = (heat_kernel(x + e, t, y, s, True).grad - heat_kernel(x - e, t, y, s, True).grad) / (2 * h)
        np.testing.assert_allclose(kv.hess[:, :, k], fdg, rtol=1e-5, atol=1e-6)
    fdt = (heat_kernel(x, t + h, y, s) - heat_kernel(x, t - h, y, s)) / (2 * h)
    np.testing.assert_allclose(kv.dt, fdt, rtol=1e-5, atol=1e-6)


def test_ilmanen_identity_random_samples():
    rng = np.random.default_rng(1)
    n = 10_000
    y = np.array([0.2, 0.1])
    s = 0.3
    t = rng.uniform(0.0, 0.29, n)
    x = y + rng.normal(scale=0.15, size=(n, 2))
    th = rng.uniform(0, 2 * np.pi, n)
    a = np.stack([np.cos(th), np.sin(th)], 1)
    res = ilmanen_residual(x, t, a, y, s)
    scale = np.maximum(1.0, heat_kernel(x, t, y, s) / (s - t) ** 2)
    assert np.max(np.abs(res) / scale) <= 1e-10


def test_flat_boundary_identity():
    ch = Channel2D(1, 0.5, 8, 4)
    x = np.stack([np.linspace(0.0, 1.0, 50), np.zeros(50)], 1)
    res = kernel_boundary_identity_residual(ch, [0.4, 0.0], 0.05, 0.0, x)
    assert np.max(res) <= 1e-10


def test_disk_boundary_identity_example():
    d = Disk2D(1, 8, 16)
    res = kernel_boundary_identity_residual(d, [0.9, 0.0], 0.01, 0.0, [[0.0, 1.0]])
    assert res[0] <= 1e-8


def test_boundary_identity_at_coincidence():
    d = Disk2D(1, 8, 16)
    th = np.linspace(0, 2 * np.pi, 17)[:-1]
    for p in np.stack([np.cos(th), np.sin(th)], 1):
        assert kernel_boundary_identity_residual(d, p, 0.02, 0.0, [p])[0] <= 1e-8
    ch = Channel2D(1, 0.5, 8, 4)
    assert kernel_boundary_identity_residual(ch, [0.3, 0.5], 0.02, 0.0, [[0.3, 0.5]])[0] <= 1e-8


def test_smooth_step_derivatives():
    z = np.linspace(-0.2, 1.2, 141)
    f, f1, f2 = smooth_step(z)
    assert np.all((f >= 0) & (f <= 1))
    assert np.all(f[z <= 0] == 0) and np.all(f[z >= 1] == 1)
    h = 1e-6
    fp = (smooth_step(z + h)[0] - smooth_step(z - h)[0]) / (2 * h)
    np.testing.assert_allclose(f1, fp, atol=1e-6)
    fpp = (smooth_step(z + h)[1] - smooth_step(z - h)[1]) / (2 * h)
    np.testing.assert_allclose(f2, fpp, atol=1e-4)


def test_cutoff_plateau_and_support():
    c = Cutoff(0.25, 0.5)
    r = np.linspace(0, 0.7, 71)
    f, fr, _ = c.radial(r)
    assert np.all(f[r <= 0.25] == 1.0)
    assert np.all(f[r >= 0.5] == 0.0)
    assert np.all(fr <= 0.0)


def test_kernel_spec_validation():
    ch = Channel2D(1, 0.5, 16, 8)
    KernelSpec(ch, (0.4, 0.05), 0.1, "pair")
    with pytest.raises(ParameterError):
        KernelSpec(ch, (0.4, 0.2), 0.1, "pair")
    with pytest.raises(ParameterError):
        KernelSpec(ch, (0.4, 0.05), 0.1, "rho1")
    with pytest.raises(ParameterError):
        KernelSpec(ch, (0.4, 0.2), 0.1, "other")


def test_truncated_kernel_supports():
    ch = Channel2D(1, 0.5, 16, 8)
    spec = KernelSpec(ch, (0.4, 0.0), 0.1)
    far = np.array([[0.4 + 0.13, 0.0]])  # |x - y| >= kappa/2 = 0.125
    r1, r2 = truncated_kernels(spec, far, 0.0)
    assert r1[0] == 0.0 and r2[0] == 0.0
    deep = np.array([[0.4, 0.25]])  # outside the collar of width kappa
    assert truncated_kernels(spec, deep, 0.0)[1][0] == 0.0
    with pytest.raises(ParameterError):
        truncated_kernels(spec, far, 0.2)


def test_mirror_normal_derivative_vanishes():
    ch = Channel2D(1, 0.5, 16, 8)
    spec = KernelSpec(ch, (0.4, 0.0), 0.05)
    xs = np.linspace(0.3, 0.5, 41)
    on = np.stack([xs, np.zeros_like(xs)], 1)
    _, _, g1, g2 = truncated_kernels(spec, on, 0.0, gradient=True)
    assert np.max(np.abs((g1 + g2)[:, 1])) <= 1e-8
    # centred difference straddling the wall; the reflected part extends the pair evenly
    h = 1e-5
    pair = lambda p: np.sum(truncated_kernels(spec, p, 0.0), axis=0)  # noqa: E731
    up = np.stack([xs, np.full_like(xs, h)], 1)
    dn = np.stack([xs, np.full_like(xs, -h)], 1)
    assert np.max(np.abs(pair(up) - pair(dn)) / (2 * h)) <= 1e-8


def test_reflected_gradient_matches_differences():
    d = Disk2D(1, 8, 16)
    spec = KernelSpec(d, (0.85, 0.1), 0.1)
    rng = np.random.default_rng(4)
    r = rng.uniform(0.55, 0.99, 30)
    th = rng.uniform(-0.4, 0.6, 30)
    x = np.stack([r * np.cos(th), r * np.sin(th)], 1)
    _, _, g1, g2 = truncated_kernels(spec, x, 0.02, gradient=True)
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fp = truncated_kernels(spec, x + e, 0.02)
        fm = truncated_kernels(spec, x - e, 0.02)
        assert np.all(np.abs(g1[:, k] - (fp[0] - fm[0]) / (2 * h)) <= 1e-5 * (1 + np.abs(g1[:, k])))
        assert np.all(np.abs(g2[:, k] - (fp[1] - fm[1]) / (2 * h)) <= 1e-5 * (1 + np.abs(g2[:, k])))


def test_kernel_weight_variants():
    ch = Channel2D(1, 0.5, 16, 8)
    x = ch.centers
    pair = kernel_weight(KernelSpec(ch, (0.4, 0.05), 0.1, "pair"), x, 0.0)
    r2 = kernel_weight(KernelSpec(ch, (0.4, 0.05), 0.1, "rho2"), x, 0.0)
    r1, _ = truncated_kernels(KernelSpec(ch, (0.4, 0.05), 0.1, "pair"), x, 0.0)
    np.testing.assert_allclose(pair, r1 + r2)


# -- monotonicity --------------------------------------------------------------------

def test_monotonicity_fit_grid():
    assert FIT_GRID[0] == pytest.approx(1e-3) and FIT_GRID[-1] == pytest.approx(1e6)
    assert len(FIT_GRID) == 289
    np.testing.assert_allclose(np.diff(np.log10(FIT_GRID)), 1 / 32)


def test_monotonicity_constant_run(quartic60):
    # the kernel scale sqrt(s - t) stays well inside the cutoff plateau of radius kappa/4 = 0.25
    dom = Channel2D(2, 2, 16, 16)
    fld = initial_profile(dom, quartic60, 0.05, "constant", {"value": 1.0})
    rec = run(fld, 0.01, snapshot_every=1)
    for spec in (KernelSpec(dom, (1.0, 0.0), 0.012), KernelSpec(dom, (1.0, 1.0), 0.012, "rho1")):
        rep = monotonicity_check(rec, spec, C1=1.0, C2=1.0)
        assert rep.passed_user
        assert rep.violations == 0
        assert rep.feasible
        assert np.all(rep.discrepancy_term == 0.0)
        assert np.all(rep.lhs <= rep.rhs + rep.tolerance)


def test_monotonicity_constant_run_wide_kernel_needs_larger_c2(quartic60):
    dom = Channel2D(2, 2, 16, 16)
    fld = initial_profile(dom, quartic60, 0.05, "constant", {"value": 1.0})
    rec = run(fld, 0.01, snapshot_every=1)
    rep = monotonicity_check(rec, KernelSpec(dom, (1.0, 0.0), 0.03), C1=1.0, C2=1.0)
    assert not rep.passed_user
    assert rep.feasible and rep.violations == 0
    assert 1.0 < rep.C2 < 10.0


def test_monotonicity_interior_variant_reports_zero_c1(quartic60):
    dom = Channel2D(1, 0.5, 32, 16)
    fld = initial_profile(dom, quartic60, 0.06, "well_prepared_interface",
                          {"interface": {"shape": "band", "lower": 0.3, "upper": 0.7, "period": 1.0}})
    rec = run(fld, 0.005, snapshot_every=2)
    rep = monotonicity_check(rec, KernelSpec(dom, (0.3, 0.25), 0.02, "rho1"))
    assert rep.C1 == 0.0
    assert rep.violations == 0 and rep.feasible


def test_monotonicity_large_user_constants_pass(quartic60):
    dom = Channel2D(1, 0.5, 32, 16)
    fld = initial_profile(dom, quartic60, 0.06, "well_prepared_interface",
                          {"interface": {"shape": "band", "lower": 0.3, "upper": 0.7, "period": 1.0}})
    rec = run(fld, 0.005, snapshot_every=2)
    spec = KernelSpec(dom, (0.3, 0.0), 0.02)
    fitted = monotonicity_check(rec, spec)
    rep = monotonicity_check(rec, spec, C1=fitted.C1, C2=10 * fitted.C2 + 1.0)
    assert rep.passed_user
    assert np.isfinite(fitted.C1) and np.isfinite(fitted.C2)


def test_monotonicity_errors(quartic60):
    dom = Channel2D(1, 0.5, 16, 8)
    fld = initial_profile(dom, quartic60, 0.1, "constant", {"value": 1.0})
    rec = run(fld, 0.01, snapshot_every=1)
    with pytest.raises(ResolutionError):
        monotonicity_check(rec, KernelSpec(dom, (0.5, 0.0), 0.01 + 2 * rec.base_dt))
    with pytest.raises(ResolutionError):
        monotonicity_check(rec, KernelSpec(dom, (0.5, 0.0), 1.0), window=(0.0, 0.0))
    neg = make_polynomial_model([0.25, 0.0, -0.5, 0.0, 0.25], [0.0, -0.1])
    fneg = PhaseField(dom, neg, 0.1, np.ones(dom.n_cells))
    with pytest.raises(HypothesisError):
        monotonicity_check(frozen_record(fneg, [0.0, 0.01]), KernelSpec(dom, (0.5, 0.0), 1.0))


# -- boundary energy budget ------------------------------------------------------------

def test_budget_frozen_zero_state(quartic90):
    fld = initial_profile(Channel2D(1, 0.5, 32, 16), quartic90, 0.1, "constant", {"value": 0.0})
    rec = frozen_record(fld, np.linspace(0, 1, 11))
    value, C = boundary_energy_budget(rec, 1.0)
    assert value == pytest.approx(5.0, rel=1e-12)
    assert C == pytest.approx(2.5, rel=1e-12)


def test_budget_frozen_zero_state_with_contact_energy(quartic60):
    # the boundary condition supplies a normal derivative -sigma'(0)/eps
    fld = initial_profile(Channel2D(1, 0.5, 32, 16), quartic60, 0.1, "constant", {"value": 0.0})
    value, _ = boundary_energy_budget(frozen_record(fld, np.linspace(0, 1, 11)), 1.0)
    grad_n = 0.5 / math.sqrt(2) / 0.1
    assert value == pytest.approx(2 * (0.05 * grad_n**2 + 2.5), rel=1e-12)


@pytest.mark.parametrize("value", [1.0, -1.0])
def test_budget_constant_states(quartic60, disk_small, value):
    fld = initial_profile(disk_small, quartic60, 0.1, "constant", {"value": value})
    rec = run(fld, 0.005)
    assert boundary_energy_budget(rec)[0] == 0.0


def test_budget_rejects_horizon(quartic60, channel_small):
    fld = initial_profile(channel_small, quartic60, 0.1, "constant", {"value": 0.0})
    with pytest.raises(ParameterError):
        boundary_energy_budget(frozen_record(fld, [0.0, 1.0]), 2.0)


# -- contact angles -------------------------------------------------------------------

def tilted_field(theta_deg, eps, nx, ny, Lx=1.0, Ly=0.5, model=None):
    model = model or make_quartic_model(math.pi / 2)
    dom = Channel2D(Lx, Ly, nx, ny)
    th = math.radians(theta_deg)
    n = np.array([-math.sin(th), math.cos(th)])
    d = (dom.centers - np.array([0.5 * Lx, 0.0])) @ n
    return PhaseField(dom, model, eps, np.tanh(d / (math.sqrt(2) * eps)))


def bottom_contact(results, x0):
    cand = [c for c in results if c.component == "bottom" and abs(c.position - x0) < 0.05]
    assert len(cand) == 1
    return cand[0]


@pytest.mark.parametrize("theta", [60.0, 90.0, 75.0])
def test_synthetic_angle_recovered(theta):
    fld = tilted_field(theta, 0.04, 256, 128)
    got = math.degrees(bottom_contact(contact_angle_extract(fld), 0.5).angle)
    assert got == pytest.approx(theta, abs=2.0)


def test_synthetic_angle_line_fit():
    fld = tilted_field(60.0, 0.04, 256, 128)
    got = math.degrees(bottom_contact(contact_angle_extract(fld, fit="line"), 0.5).angle)
    assert got == pytest.approx(60.0, abs=2.0)


def test_constant_field_has_no_contact(quartic60, channel_small):
    fld = initial_profile(channel_small, quartic60, 0.05, "constant", {"value": 1.0})
    assert contact_angle_extract(fld) == []


def test_angle_extraction_needs_resolution():
    fld = tilted_field(60.0, 0.04, 16, 8)
    with pytest.raises(InsufficientResolutionError):
        contact_angle_extract(fld)


# -- trace gap and non-concentration -------------------------------------------------------

def test_trace_gap_examples(quartic60):
    dom = Channel2D(1, 0.5, 64, 32)
    plus = initial_profile(dom, quartic60, 0.02, "constant", {"value": 1.0})
    assert trace_gap(plus) == 0.0
    sharp = np.where(dom.centers[:, 1] > 0.25, 1.0, -1.0)
    assert trace_gap(PhaseField(dom, quartic60, 0.02, sharp)) == 0.0


def test_trace_gap_detects_boundary_layer(quartic60):
    dom = Channel2D(1, 0.5, 64, 32)
    y = dom.centers[:, 1]
    layer = np.where(y < 0.05, -1.0, 1.0)  # thin -1 film on the lower wall only
    assert trace_gap(PhaseField(dom, quartic60, 0.02, layer)) == pytest.approx(1.0, abs=1e-12)


def test_nonconcentration_constant(quartic60, channel_small):
    fld = initial_profile(channel_small, quartic60, 0.05, "constant", {"value": 1.0})
    rows = nonconcentration_profile(run(fld, 0.003, snapshot_every=2), [0.05, 0.1])
    assert rows and all(r.tubular_mass == 0.0 and r.abs_discrepancy == 0.0 for r in rows)
    assert not wetting_flag(rows)


def test_nonconcentration_interface_far_from_boundary(quartic90):
    dom = Disk2D(1, 128, 64)
    fld = initial_profile(dom, quartic90, 0.04, "well_prepared_interface",
                          {"interface": {"shape": "circle", "center": [0.0, 0.0], "radius": 0.5}})
    rec = run(fld, 0.01, snapshot_every=10)
    rows = nonconcentration_profile(rec, [0.05])
    assert all(r.tubular_mass <= 0.01 * r.total_interior for r in rows)
    assert not wetting_flag(rows)


def test_wetting_flag_on_boundary_film(quartic60):
    dom = Channel2D(1, 0.5, 64, 64)
    y = dom.centers[:, 1]
    film = np.tanh((y - 0.03) / (math.sqrt(2) * 0.02))
    rec = frozen_record(PhaseField(dom, quartic60, 0.02, film), [0.0, 0.01])
    rows = nonconcentration_profile(rec, [0.05, 0.1])
    assert wetting_flag(rows)


def test_wetting_flag_uses_last_time():
    rows = [NonconcentrationRow(0.0, 0.05, 0.9, 0.0, 1.0), NonconcentrationRow(1.0, 0.05, 0.1, 0.0, 1.0)]
    assert not wetting_flag(rows)
    assert not wetting_flag([])


def test_nonconcentration_rejects_delta(quartic60, channel_small):
    fld = initial_profile(channel_small, quartic60, 0.05, "constant", {"value": 1.0})
    with pytest.raises(ParameterError):
        nonconcentration_profile(frozen_record(fld, [0.0, 1.0]), [0.5])
