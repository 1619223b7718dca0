"""Acceptance suite: twelve end-to-end criteria, one PASS/FAIL line each.

Every test prints ``CRITERION <k> PASS|FAIL: <measurements>`` before asserting,
so the measured values are visible whether or not the criterion holds.
"""
import math
import time

import numpy as np
import pytest

from contactflow.config import parse_mapping
from contactflow.diagnostics import (
    KernelSpec, contact_angle_extract, heat_kernel, ilmanen_residual, kernel_boundary_identity_residual,
    monotonicity_check,
)
from contactflow.energetics import make_quartic_model
from contactflow.geometry import Channel2D, Disk2D, Interval1D
from contactflow.harness import execute_run, read_csv, sweep
from contactflow.measures import (
    MeasurePack, default_test_functions, default_vector_fields, first_variation_direct, first_variation_formula,
    semidecreasing_check,
)
from contactflow.plots import emit_plots
from contactflow.solver import (
    PhaseField, abs_discrepancy_of, dissipation_residual, initial_profile, run, stability_cap, total_energy,
)

THETA = math.pi / 3
EPSILONS = [0.08, 0.04, 0.02]
WIDE_BAND = {"shape": "band", "lower": 0.2, "upper": 0.8, "axis": 0, "period": 1.0}


def report(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {k:2d} {'PASS' if ok else 'FAIL'}: {detail}")


def orders(values):
    v = np.asarray(values, float)
    return np.log2(v[:-1] / v[1:])


def strictly_decreasing(v):
    return all(b < a for a, b in zip(v, v[1:]))


def channel_sweep(tmp_path_factory, name, Ly, nx, ny, checks):
    base = {
        "domain": {"kind": "Channel2D", "Lx": 1.0, "Ly": Ly, "nx": nx, "ny": ny},
        "model": {"name": "quartic", "theta": THETA},
        "epsilon": EPSILONS[0], "t_final": 0.05, "snapshot_every": 10**6,
        "initial": {"kind": "well_prepared_interface", "params": {"interface": WIDE_BAND}},
        "analysis": {"deltas": [0.05], "diagnostic_time": 0.05},
    }
    out = tmp_path_factory.mktemp(name)
    t0 = time.perf_counter()
    summary = sweep(parse_mapping({"base": base, "epsilons": EPSILONS}), out, jobs=1, checks=checks)
    elapsed = time.perf_counter() - t0
    _, rows = read_csv(out / "sweep_summary.csv")
    return summary, rows, elapsed, out


@pytest.fixture(scope="module")
def channel_budget_sweep(tmp_path_factory):
    """Channel 1 x 0.5 at 256 x 128: boundary budget and trace gap."""
    return channel_sweep(tmp_path_factory, "budget", 0.5, 256, 128, ["boundary-budget", "trace"])


@pytest.fixture(scope="module")
def channel_angle_sweep(tmp_path_factory):
    """Channel 1 x 1 at 256 x 256: contact-angle emergence."""
    return channel_sweep(tmp_path_factory, "angle", 1.0, 256, 256, ["angle"])


# -- 1 -----------------------------------------------------------------------------------------

def test_pure_phases_stationary(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    domains = [Channel2D(1, 0.5, 32, 16), Disk2D(1, 16, 32), Interval1D(0, 1, 64)]
    for theta in (math.pi / 2, THETA):
        m = make_quartic_model(theta)
        for dom in domains:
            for value in (1.0, -1.0):
                fld = initial_profile(dom, m, 0.1, "constant", {"value": value})
                dt = stability_cap(m, 0.1)
                rec = run(fld, 1000 * dt, dt=dt, snapshot_every=10**9)
                assert rec.final().step_index == 1000
                worst = max(worst, float(np.max(np.abs(rec.final().values - value))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-13 and elapsed < 10
    report(capsys, 1, ok, f"max change {worst:.1e} over 1000 steps, 12 cases, {elapsed:.1f}s")
    assert ok


# -- 2 -----------------------------------------------------------------------------------------

def test_dissipation_identity_first_order(capsys):
    t0 = time.perf_counter()
    m = make_quartic_model(math.pi / 2)
    eps = 0.05
    dom = Interval1D(0, 1, 512)
    fld = initial_profile(dom, m, eps, "well_prepared_interface", {"interface": {"shape": "point", "x0": 0.5}})
    cap = stability_cap(m, eps)
    t_eval = 4 * cap
    res = []
    for k in (1, 2, 4):
        dt = cap / k
        rec = run(fld, t_eval, dt=dt, snapshot_every=10**9)
        res.append(dissipation_residual(rec, 4 * k))
    ratios = [res[i] / res[i + 1] for i in range(2)]
    elapsed = time.perf_counter() - t0
    ok = max(res) <= 1e-3 and min(ratios) >= 1.8 and elapsed < 30
    report(capsys, 2, ok, f"residuals {', '.join(f'{r:.2e}' for r in res)} at t = {t_eval:.2e}; "
                          f"halving ratios {ratios[0]:.2f}, {ratios[1]:.2f}; {elapsed:.1f}s")
    assert ok


# -- 3 -----------------------------------------------------------------------------------------

def test_exact_profile_discrepancy(capsys):
    t0 = time.perf_counter()
    m = make_quartic_model(math.pi / 2)
    eps = 0.05
    vals, rel = [], None
    for k in (8, 16, 32, 64):
        dom = Interval1D(0, 1, int(round(k / eps)))
        fld = initial_profile(dom, m, eps, "well_prepared_interface",
                              {"interface": {"shape": "point", "x0": 0.5}})
        vals.append(abs_discrepancy_of(fld))
        if rel is None:
            rel = vals[0] / total_energy(fld)
    ords = orders(vals)
    elapsed = time.perf_counter() - t0
    ok = rel <= 1e-2 and np.all(ords >= 1.9) and elapsed < 10
    report(capsys, 3, ok, f"int|xi| / E = {rel:.2e} at h = eps/8; orders "
                          f"{', '.join(f'{o:.2f}' for o in ords)}; {elapsed:.1f}s")
    assert ok


# -- 4 -----------------------------------------------------------------------------------------

def test_semidecreasing_property(capsys):
    t0 = time.perf_counter()
    m = make_quartic_model(THETA)
    dom = Channel2D(1, 0.5, 128, 64)
    fld = initial_profile(dom, m, 0.04, "well_prepared_interface", {"interface": WIDE_BAND})
    rec = run(fld, 0.02, snapshot_every=1)
    rep = semidecreasing_check(rec, default_test_functions(dom), rel_tol=1e-6)
    elapsed = time.perf_counter() - t0
    n_times = len(rep.times)
    ok = rep.violations == 0 and n_times >= 50 and len(rep.names) == 5 and elapsed < 60
    report(capsys, 4, ok, f"{rep.violations} violations over 5 functions x {n_times} times "
                          f"(largest increase beyond the bound {rep.worst:.2e}, tolerance {rep.tolerance:.1e}); "
                          f"{elapsed:.1f}s")
    assert ok


# -- 5 -----------------------------------------------------------------------------------------

def test_first_variation_identity_converges(capsys):
    t0 = time.perf_counter()
    m = make_quartic_model(THETA)
    diffs = []
    for n in (64, 128, 256):
        dom = Channel2D(1, 0.5, n, n // 2)
        fld = initial_profile(dom, m, 0.05, "well_prepared_interface", {"interface": WIDE_BAND})
        p = MeasurePack(run(fld, 0.01, snapshot_every=10**9).final())
        fields = default_vector_fields(dom)
        assert len(fields) >= 10
        diffs.append(max(abs(first_variation_formula(p, g) - first_variation_direct(p, g)) for g in fields))
    ords = orders(diffs)
    elapsed = time.perf_counter() - t0
    ok = bool(np.all(ords >= 0.9)) and elapsed < 120
    report(capsys, 5, ok, f"max |formula - direct| {', '.join(f'{d:.4f}' for d in diffs)} at h = 1/64, 1/128, "
                          f"1/256; orders {', '.join(f'{o:.2f}' for o in ords)}; {elapsed:.1f}s")
    assert ok


# -- 6 -----------------------------------------------------------------------------------------

def test_boundary_budget_uniform_in_epsilon(capsys, channel_budget_sweep):
    summary, rows, elapsed, _ = channel_budget_sweep
    Cs = [float(r["budget_C"]) for r in rows]
    ratio = max(Cs) / min(Cs)
    ok = ratio <= 2.0 and elapsed < 600
    report(capsys, 6, ok, f"fitted C {', '.join(f'{c:.4f}' for c in Cs)} for eps {EPSILONS}; "
                          f"max/min {ratio:.3f}; sweep {elapsed:.0f}s")
    assert ok


# -- 7 -----------------------------------------------------------------------------------------

def tilted(theta_deg, eps, n):
    dom = Channel2D(1, 0.5, n, n // 2)
    th = math.radians(theta_deg)
    d = (dom.centers - np.array([0.5, 0.0])) @ np.array([-math.sin(th), math.cos(th)])
    return PhaseField(dom, make_quartic_model(math.pi / 2), eps, np.tanh(d / (math.sqrt(2) * eps)))


def test_contact_angle_emerges(capsys, channel_angle_sweep):
    summary, rows, elapsed, out = channel_angle_sweep
    errs = [float(r["angle_error_deg"]) for r in rows]
    _, last = read_csv(out / "eps_2" / "analysis" / "angle.csv")
    worst_last = max(float(r["error_deg"]) for r in last)
    oracle = []
    for eps in (0.04, 0.02):
        fld = tilted(60.0, eps, int(round(4 / eps)))
        c = [a for a in contact_angle_extract(fld) if a.component == "bottom" and abs(a.position - 0.5) < 0.05]
        oracle.append(abs(math.degrees(c[0].angle) - 60.0))
    ok = strictly_decreasing(errs) and worst_last <= 6.0 and max(oracle) <= 2.0 and elapsed <= 600
    report(capsys, 7, ok, f"mean angle error {', '.join(f'{e:.2f}' for e in errs)} deg for eps {EPSILONS} "
                          f"(worst contact at eps=0.02: {worst_last:.2f}); synthetic 60 deg oracle errors "
                          f"{', '.join(f'{o:.3f}' for o in oracle)}; sweep {elapsed:.0f}s")
    assert ok


# -- 8 -----------------------------------------------------------------------------------------

def test_discrepancy_and_collar_mass_vanish(capsys, tmp_path_factory):
    base = {
        "domain": {"kind": "Disk2D", "R": 1.0, "n_r": 512, "n_theta": 64},
        "model": {"name": "quartic", "theta": THETA},
        "epsilon": EPSILONS[0], "t_final": 0.05, "snapshot_every": 10**6,
        "initial": {"kind": "well_prepared_interface",
                    "params": {"interface": {"shape": "circle", "center": [0.0, 0.0], "radius": 0.5}}},
        "analysis": {"deltas": [0.05], "diagnostic_time": 0.05},
    }
    out = tmp_path_factory.mktemp("disk")
    t0 = time.perf_counter()
    summary = sweep(parse_mapping({"base": base, "epsilons": EPSILONS}), out, jobs=1, checks=["nonconcentration"])
    elapsed = time.perf_counter() - t0
    _, rows = read_csv(out / "sweep_summary.csv")
    xi = [float(r["abs_discrepancy"]) for r in rows]
    tm = [float(r["tubular_mass"]) for r in rows]
    ok = strictly_decreasing(xi) and strictly_decreasing(tm)
    report(capsys, 8, ok, f"int|xi| {', '.join(f'{v:.4f}' for v in xi)}; tubular mass(0.05) "
                          f"{', '.join(f'{v:.1e}' for v in tm)} at t = 0.05 for eps {EPSILONS}; {elapsed:.0f}s")
    assert ok


# -- 9 -----------------------------------------------------------------------------------------

def test_trace_gap_decreases(capsys, channel_budget_sweep):
    _, rows, elapsed, _ = channel_budget_sweep
    gaps = [float(r["trace_gap"]) for r in rows]
    ok = strictly_decreasing(gaps)
    report(capsys, 9, ok, f"trace gap {', '.join(f'{g:.4f}' for g in gaps)} at t = 0.05 for eps {EPSILONS}")
    assert ok


# -- 10 ----------------------------------------------------------------------------------------

def test_kernel_identities(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    n = 10_000
    y = rng.uniform(-0.5, 0.5, 2)
    s = 0.5
    t = rng.uniform(0.0, s - 1e-3, n)
    x = y + rng.normal(scale=0.3, size=(n, 2))
    th = rng.uniform(0, 2 * np.pi, n)
    a = np.stack([np.cos(th), np.sin(th)], 1)
    # relative to the natural size of the terms
    scale = np.maximum(1.0, heat_kernel(x, t, y, s) * (1 + np.sum((x - y) ** 2, 1) / (s - t)) / (s - t))
    ilm = float(np.max(np.abs(ilmanen_residual(x, t, a, y, s)) / scale))
    ch = Channel2D(1, 0.5, 16, 8)
    xb = np.concatenate([np.stack([np.linspace(0, 1, 200), np.zeros(200)], 1),
                         np.stack([np.linspace(0, 1, 200), np.full(200, 0.5)], 1)])
    flat = max(float(np.max(kernel_boundary_identity_residual(ch, [0.37, 0.0], 0.05, 0.0, xb[:200]))),
               float(np.max(kernel_boundary_identity_residual(ch, [0.61, 0.5], 0.05, 0.0, xb[200:]))))
    disk = Disk2D(1, 8, 16)
    ang = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    xc = np.stack([np.cos(ang), np.sin(ang)], 1)
    circ = max(float(kernel_boundary_identity_residual(disk, [0.9, 0.0], 0.01, 0.0, [[0.0, 1.0]])[0]),
               float(np.max(kernel_boundary_identity_residual(disk, [0.9, 0.0], 0.01, 0.0, xc))))
    elapsed = time.perf_counter() - t0
    ok = ilm <= 1e-10 and flat <= 1e-10 and circ <= 1e-8 and elapsed < 10
    report(capsys, 10, ok, f"Ilmanen {ilm:.1e} (10^4 samples); flat boundary {flat:.1e}; disk boundary "
                           f"{circ:.1e}; {elapsed:.1f}s")
    assert ok


# -- 11 ----------------------------------------------------------------------------------------

def test_monotonicity_constants_stable(capsys):
    t0 = time.perf_counter()
    m = make_quartic_model(THETA)
    eps, T = 0.04, 0.02
    pair = [(0.25, 0.0), (0.5, 0.025), (0.75, 0.05)]
    interior = [(0.3, 0.25), (0.7, 0.2)]
    terminal = [T + 0.01, T + 0.02, T + 0.04]
    fitted = {}
    for level, (nx, frac) in enumerate([(128, 0.5), (256, 0.25)]):
        dom = Channel2D(1, 0.5, nx, nx // 2)
        dt = frac * stability_cap(m, eps)
        fld = initial_profile(dom, m, eps, "well_prepared_interface", {"interface": WIDE_BAND})
        rec = run(fld, T, dt=dt, snapshot_every=int(round(0.001 / dt)))
        packs = [MeasurePack(f) for f in rec.snapshots()]
        for c in pair + interior:
            for s in terminal:
                spec = KernelSpec(dom, c, s, "pair" if c in pair else "rho1")
                rep = monotonicity_check(rec, spec, packs=packs, refinement_tag=f"level{level}")
                assert rep.violations == 0
                fitted.setdefault((c, s), []).append(rep)
    finite = all(r.feasible and math.isfinite(r.C1) and math.isfinite(r.C2) for v in fitted.values() for r in v)
    ratios = []
    for coarse, fine in fitted.values():
        for a, b in ((coarse.C1, fine.C1), (coarse.C2, fine.C2)):
            ratios.append(1.0 if a == b else (b / a if a > 0 else math.inf))
    elapsed = time.perf_counter() - t0
    ok = finite and max(ratios) <= 1.1 and len(fitted) == 15 and elapsed < 300
    c2 = [r.C2 for v in fitted.values() for r in v]
    report(capsys, 11, ok, f"15 kernels (3 boundary + 2 interior centres x 3 s); fitted C2 in "
                           f"[{min(c2):.3g}, {max(c2):.3g}]; fine/coarse ratios in [{min(ratios):.3f}, "
                           f"{max(ratios):.3f}]; {elapsed:.1f}s")
    assert ok


# -- 12 ----------------------------------------------------------------------------------------

def test_artifacts_deterministic_and_resumable(capsys, tmp_path):
    t0 = time.perf_counter()
    base = {
        "domain": {"kind": "Channel2D", "Lx": 1.0, "Ly": 0.5, "nx": 64, "ny": 32},
        "model": {"name": "quartic", "theta": THETA},
        "epsilon": 0.06, "t_final": 0.01, "snapshot_every": 5,
        "initial": {"kind": "well_prepared_interface", "params": {"interface": WIDE_BAND}},
    }
    cfg = parse_mapping(base)
    execute_run(cfg, tmp_path / "full")
    execute_run(cfg, tmp_path / "split", until=0.005)
    execute_run(cfg, tmp_path / "split", resume=tmp_path / "split" / "checkpoint.ckpt")

    def files(root):
        return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}

    resume_same = files(tmp_path / "full") == files(tmp_path / "split")
    sw = parse_mapping({"base": base, "epsilons": [0.08, 0.06]})
    sweep(sw, tmp_path / "j1", jobs=1, checks=["energy", "semidecreasing"])
    sweep(sw, tmp_path / "j2", jobs=2, checks=["energy", "semidecreasing"])
    sweep_same = files(tmp_path / "j1") == files(tmp_path / "j2")
    p1 = emit_plots(tmp_path / "j1", tmp_path / "plots1")
    p2 = emit_plots(tmp_path / "j1", tmp_path / "plots2")
    plots_same = [p.read_bytes() for p in p1] == [p.read_bytes() for p in p2]
    elapsed = time.perf_counter() - t0
    ok = resume_same and sweep_same and plots_same and elapsed < 60
    report(capsys, 12, ok, f"resume identical: {resume_same}; sweep jobs=1 vs 2 identical: {sweep_same}; "
                           f"{len(p1)} SVGs identical: {plots_same}; {elapsed:.1f}s")
    assert ok
