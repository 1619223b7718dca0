"""Run, resume, analyse and sweep orchestration with deterministic artifacts.

A run directory holds

- ``config.json``: the effective configuration (canonical JSON),
- ``series.csv``: one row per time step,
- ``snapshots/step_XXXXXXXX.ckpt``: stored states,
- ``checkpoint.ckpt``: the latest state, for resuming.

Analysis writes one CSV per check and ``summary.json`` into its output
directory.  Column layouts are listed in ``docs/formats.md``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .checkpoint import canonical_json, field_from_checkpoint, read_checkpoint, write_checkpoint
from .config import RunConfig, SweepConfig, config_hash, parse_mapping, validate_run
from .energetics import contact_angle, model_from_spec
from .errors import ConfigError, ContactFlowError, ResolutionError
from .geometry import Channel2D, Disk2D, DomainGeometry, Interval1D, make_domain
from .measures import (MeasurePack, default_test_functions, default_vector_fields, first_variation_direct,
                       first_variation_formula, semidecreasing_check)
from .solver import PhaseField, RunRecord, initial_profile, run, stability_cap, total_energy

SERIES_COLUMNS = ["step_index", "time", "step_size", "substeps", "energy", "interior_energy",
                  "boundary_energy", "abs_discrepancy", "boundary_density", "dissipation"]
ALL_CHECKS = ["energy", "semidecreasing", "boundary-budget", "first-variation", "angle", "trace",
              "nonconcentration", "monotonicity"]


# -- CSV ---------------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows, config_sha: str) -> Path:
    """CSV with a ``# config_sha256: <hex>`` comment line, a header row and ``repr`` floats."""
    buf = io.StringIO()
    buf.write(f"# config_sha256: {config_sha}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_csv(path) -> tuple[str, list[dict]]:
    """Config hash and rows (as strings) of a CSV written by :func:`write_csv`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing CSV file {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    sha = ""
    if lines and lines[0].startswith("# config_sha256:"):
        sha = lines[0].split(":", 1)[1].strip()
        lines = lines[1:]
    rows = list(csv.DictReader(lines))
    return sha, rows


# -- building blocks ---------------------------------------------------------------------------

def build_problem(cfg: RunConfig):
    """Domain, model, initial field, base step and declared energy bound."""
    d = cfg.data
    domain = make_domain(d["domain"])
    model = model_from_spec(d["model"])
    params = dict(d["initial"]["params"])
    if d["initial"]["kind"] == "random_seeded":
        params.setdefault("seed", d["seed"])
    init = initial_profile(domain, model, d["epsilon"], d["initial"]["kind"], params, d["E0"], d["boundary"])
    cap = stability_cap(model, d["epsilon"])
    dt_spec = d["dt"]
    if dt_spec == "cap":
        dt = cap
    elif isinstance(dt_spec, dict):
        dt = dt_spec["fraction"] * cap
    else:
        dt = float(dt_spec)
    E0 = d["E0"] if d["E0"] is not None else total_energy(init)
    return domain, model, init, dt, E0


def _series_rows(rec: RunRecord, skip_first: bool) -> list[dict]:
    rows = []
    for i in range(len(rec.times)):
        if skip_first and i == 0:
            continue
        rows.append({
            "step_index": rec.step_indices[i],
            "time": rec.times[i],
            "step_size": rec.step_sizes[i - 1] if i else 0.0,
            "substeps": rec.substeps[i - 1] if i else 0,
            "energy": rec.energy[i],
            "interior_energy": rec.interior_energy[i],
            "boundary_energy": rec.boundary_energy[i],
            "abs_discrepancy": rec.abs_discrepancy[i],
            "boundary_density": rec.boundary_density[i],
            "dissipation": rec.dissipation[i - 1] if i else 0.0,
        })
    return rows


def _snapshot_name(step: int) -> str:
    return f"step_{step:08d}.ckpt"


def _n_total(t_final: float, dt: float) -> int:
    return max(int(math.ceil(t_final / dt - 1e-9)), 0)


def execute_run(cfg: RunConfig, out, resume=None, until: float | None = None) -> dict:
    """Integrate a configuration and write the run directory.

    Parameters
    ----------
    resume : path, optional
        Checkpoint to continue from; earlier rows of ``series.csv`` in ``out``
        are kept so the directory matches an uninterrupted run.
    until : float, optional
        Stop at the last grid time not after ``until`` (an interruption);
        ``checkpoint.ckpt`` then holds the state to resume from.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    domain, model, init, dt, E0 = build_problem(cfg)
    sha = cfg.hash
    d = cfg.data
    every = d["snapshot_every"]
    n_total = _n_total(d["t_final"], dt)
    prior_rows: list[dict] = []
    start = init
    if resume is not None:
        start, header = field_from_checkpoint(resume, domain, model)
        if header["config_hash"] != sha:
            raise ConfigError(f"{resume}: checkpoint was written by config {header['config_hash'][:12]}, "
                              f"not {sha[:12]}")
        if header["base_dt"] != dt:
            raise ConfigError(f"{resume}: base step {header['base_dt']} differs from configured {dt}")
        series = out / "series.csv"
        if series.exists():
            psha, rows = read_csv(series)
            if psha == sha:
                prior_rows = [r for r in rows if int(r["step_index"]) <= start.step_index]
    t_stop = d["t_final"]
    if until is not None and until < d["t_final"]:
        k_stop = int(math.floor(until / dt + 1e-9))
        t_stop = k_stop * dt
    wanted = [k for k in range(0, n_total + 1, every)] + [n_total]
    rec = run(start, t_stop, dt=dt, snapshot_every=None, snapshot_steps=wanted, E0=E0, config_hash=sha)
    (out / "config.json").write_text(canonical_json(d) + "\n", encoding="utf-8")
    keep = set(wanted)
    for k, step_idx in enumerate(rec.snapshot_steps):
        if step_idx in keep:
            write_checkpoint(out / "snapshots" / _snapshot_name(step_idx), rec.snapshot(k), dt, sha)
    rows = prior_rows + _series_rows(rec, skip_first=bool(prior_rows))
    write_csv(out / "series.csv", SERIES_COLUMNS, rows, sha)
    final = rec.final()
    write_checkpoint(out / "checkpoint.ckpt", final, dt, sha)
    complete = final.step_index >= n_total
    return {"config_sha256": sha, "time": final.time, "step_index": final.step_index, "complete": complete,
            "energy": rec.energy[-1], "E0": E0, "base_dt": dt}


def load_record(run_dir) -> tuple[RunRecord, RunConfig]:
    """Rebuild a :class:`RunRecord` from a run directory."""
    run_dir = Path(run_dir)
    cfg_path = run_dir / "config.json"
    if not cfg_path.exists():
        raise FileNotFoundError(f"{run_dir}: no config.json; not a run directory")
    cfg = validate_run(json.loads(cfg_path.read_text(encoding="utf-8")))
    domain, model, init, dt, E0 = build_problem(cfg)
    sha, rows = read_csv(run_dir / "series.csv")
    rec = RunRecord(domain, model, cfg["epsilon"], cfg["boundary"], dt, E0, sha)
    for i, r in enumerate(rows):
        rec.step_indices.append(int(r["step_index"]))
        rec.times.append(float(r["time"]))
        for key in ("energy", "interior_energy", "boundary_energy", "abs_discrepancy", "boundary_density"):
            getattr(rec, key).append(float(r[key]))
        if i:
            rec.step_sizes.append(float(r["step_size"]))
            rec.substeps.append(int(r["substeps"]))
            rec.dissipation.append(float(r["dissipation"]))
    last = rec.step_indices[-1]
    for p in sorted((run_dir / "snapshots").glob("step_*.ckpt")):
        header, values = read_checkpoint(p)
        if header["step_index"] > last:
            continue
        rec.snapshot_steps.append(header["step_index"])
        rec.snapshot_times.append(header["time"])
        rec.snapshot_values.append(values)
    if not rec.snapshot_steps:
        raise FileNotFoundError(f"{run_dir}: no snapshots")
    return rec, cfg


# -- analysis defaults -------------------------------------------------------------------------------

def default_kernel_centers(domain: DomainGeometry) -> tuple[list, list]:
    """Boundary-near centres (within ``kappa/2``) and interior centres (beyond it)."""
    if isinstance(domain, Channel2D):
        q = domain.Ly / 4
        return ([[0.25 * domain.Lx, 0.0], [0.5 * domain.Lx, 0.2 * q], [0.75 * domain.Lx, 0.4 * q]],
                [[0.3 * domain.Lx, 2 * q], [0.7 * domain.Lx, 1.6 * q]])
    if isinstance(domain, Disk2D):
        R = domain.R
        return ([[0.9 * R, 0.0], [0.0, 0.7 * R], [-0.6 * R, -0.6 * R]], [[0.0, 0.0], [0.2 * R, 0.1 * R]])
    if isinstance(domain, Interval1D):
        L = domain.b - domain.a
        return ([[domain.a + 0.1 * L], [domain.b - 0.1 * L], [domain.a + 0.2 * L]],
                [[domain.a + 0.5 * L], [domain.a + 0.4 * L]])
    raise ConfigError(f"no default kernel centres for {type(domain).__name__}")


def default_terminal_times(t_final: float, dt: float) -> list[float]:
    step = max(0.25 * t_final, 8 * dt)
    return [t_final + m * step for m in (1, 2, 4)]


def _analysis_params(cfg: RunConfig, rec: RunRecord) -> dict:
    a = dict(cfg.analysis)
    dom = rec.domain
    if a["deltas"] is None:
        a["deltas"] = sorted({min(0.05, dom.kappa), 0.5 * dom.kappa})
    if a["diagnostic_time"] is None:
        a["diagnostic_time"] = rec.snapshot_times[-1]
    pair, interior = default_kernel_centers(dom)
    if a["kernel_centers"] is None:
        a["kernel_centers"] = pair
    if a["interior_centers"] is None:
        a["interior_centers"] = interior
    if a["terminal_times"] is None:
        a["terminal_times"] = default_terminal_times(rec.times[-1], rec.base_dt)
    return a


# -- checks ----------------------------------------------------------------------------------------------

def _check_energy(rec, params, packs):
    E = np.asarray(rec.energy)
    tol = 1e-10 * max(1.0, rec.E0)
    inc = np.diff(E) if len(E) > 1 else np.zeros(0)
    rows = []
    for i in range(1, len(E)):
        res = abs((E[i] - E[i - 1]) / rec.step_sizes[i - 1] + rec.dissipation[i - 1])
        rows.append({"step_index": rec.step_indices[i], "time": rec.times[i], "energy": E[i],
                     "increase": inc[i - 1], "dissipation_residual": res})
    worst = float(np.max(inc)) if inc.size else 0.0
    return ({"passed": bool(worst <= tol), "worst_residual": worst, "tolerance": tol},
            ["step_index", "time", "energy", "increase", "dissipation_residual"], rows)


def _check_semidecreasing(rec, params, packs):
    funcs = default_test_functions(rec.domain)
    rep = semidecreasing_check(rec, funcs, rel_tol=params["semidecreasing_rel_tol"])
    rows = []
    for fi, name in enumerate(rep.names):
        for k in range(rep.slack.shape[1]):
            rows.append({"function": name, "t_start": rep.times[k], "t_end": rep.times[k + 1],
                         "slack": rep.slack[fi, k]})
    return ({"passed": rep.passed, "worst_residual": rep.worst, "violations": rep.violations,
             "tolerance": rep.tolerance}, ["function", "t_start", "t_end", "slack"], rows)


def _check_budget(rec, params, packs):
    value, C = diag.boundary_energy_budget(rec)
    T = rec.times[-1]
    ok = math.isfinite(value)
    return ({"passed": ok, "worst_residual": 0.0, "constants": {"C": C}, "value": value, "T": T},
            ["T", "value", "C"], [{"T": T, "value": value, "C": C}])


def _check_first_variation(rec, params, packs):
    fields = default_vector_fields(rec.domain)
    h = rec.domain.spacing
    tol = params["first_variation_factor"] * h * max(1.0, rec.E0)
    rows, worst = [], 0.0
    for p in packs[1:] if len(packs) > 1 else packs:
        for g in fields:
            direct = first_variation_direct(p, g)
            formula = first_variation_formula(p, g)
            diff = abs(formula - direct)
            worst = max(worst, diff)
            rows.append({"time": p.time, "field": g.name, "direct": direct, "formula": formula,
                         "difference": diff})
    return ({"passed": bool(worst <= tol), "worst_residual": worst, "tolerance": tol, "h": h},
            ["time", "field", "direct", "formula", "difference"], rows)


def _pack_at(rec, packs, t):
    return packs[rec.snapshot_index_at(t)]


def _check_angle(rec, params, packs):
    target = contact_angle(rec.model)
    p = _pack_at(rec, packs, params["diagnostic_time"])
    try:
        angles = diag.contact_angle_extract(p.field)
    except ResolutionError as exc:
        return ({"passed": False, "worst_residual": float("inf"), "error": str(exc),
                 "target_deg": math.degrees(target)}, ["component", "position", "angle_deg", "error_deg",
                                                       "n_points"], [])
    rows = [{"component": a.component, "position": a.position, "angle_deg": math.degrees(a.angle),
             "error_deg": abs(math.degrees(a.angle - target)), "n_points": a.n_points} for a in angles]
    worst = max((r["error_deg"] for r in rows), default=0.0)
    tol = params["angle_tolerance_deg"]
    return ({"passed": bool(worst <= tol), "worst_residual": worst, "tolerance": tol,
             "target_deg": math.degrees(target), "time": p.time, "contacts": len(rows),
             "mean_error_deg": float(np.mean([r["error_deg"] for r in rows])) if rows else 0.0},
            ["component", "position", "angle_deg", "error_deg", "n_points"], rows)


def _check_trace(rec, params, packs):
    rows = [{"time": p.time, "trace_gap": diag.trace_gap(p.field)} for p in packs]
    at = diag.trace_gap(_pack_at(rec, packs, params["diagnostic_time"]).field)
    return ({"passed": True, "kind": "report", "worst_residual": max(r["trace_gap"] for r in rows),
             "value_at_diagnostic_time": at}, ["time", "trace_gap"], rows)


def _check_nonconcentration(rec, params, packs):
    from .measures import abs_discrepancy_integral, tubular_mass

    rows = []
    for p in packs:
        ad = abs_discrepancy_integral(p)
        tot = float(np.sum(p.e * p.domain.volumes))
        for dl in params["deltas"]:
            rows.append(diag.NonconcentrationRow(p.time, float(dl), tubular_mass(p, dl), ad, tot))
    wet = diag.wetting_flag(rows, params["wetting_fraction"])
    pd = _pack_at(rec, packs, params["diagnostic_time"])
    at = [r for r in rows if r.time == pd.time]
    out = [{"time": r.time, "delta": r.delta, "tubular_mass": r.tubular_mass,
            "abs_discrepancy": r.abs_discrepancy, "total_interior": r.total_interior} for r in rows]
    return ({"passed": not wet, "wetting": wet, "worst_residual": max(r.tubular_mass for r in rows),
             "abs_discrepancy_at_diagnostic_time": at[0].abs_discrepancy,
             "tubular_mass_at_diagnostic_time": {repr(r.delta): r.tubular_mass for r in at}},
            ["time", "delta", "tubular_mass", "abs_discrepancy", "total_interior"], out)


def _check_monotonicity(rec, params, packs):
    dom = rec.domain
    C1u, C2u = params["user_constants"]
    specs = []
    for c in params["kernel_centers"]:
        for s in params["terminal_times"]:
            specs.append(diag.KernelSpec(dom, tuple(c), float(s), "pair"))
    for c in params["interior_centers"]:
        for s in params["terminal_times"]:
            specs.append(diag.KernelSpec(dom, tuple(c), float(s), "rho1"))
    rows, consts = [], []
    feasible, worst = True, 0.0
    for i, spec in enumerate(specs):
        rep = diag.monotonicity_check(rec, spec, C1=C1u, C2=C2u, packs=packs)
        feasible &= rep.feasible
        worst = max(worst, float(np.max(rep.lhs - rep.rhs)) if rep.lhs.size else 0.0)
        consts.append({"spec": i, "variant": rep.variant, "center": list(rep.center), "s": rep.s,
                       "C1": rep.C1, "C2": rep.C2, "violations": rep.violations,
                       "user_violations": rep.user_violations})
        for k in range(len(rep.t_mid)):
            rows.append({"spec": i, "variant": rep.variant, "center": " ".join(repr(float(v)) for v in rep.center),
                         "s": rep.s, "t_mid": rep.t_mid[k], "lhs": rep.lhs[k], "rhs": rep.rhs[k],
                         "C1": rep.C1, "C2": rep.C2})
    return ({"passed": bool(feasible), "worst_residual": worst, "constants": consts},
            ["spec", "variant", "center", "s", "t_mid", "lhs", "rhs", "C1", "C2"], rows)


CHECKS = {
    "energy": _check_energy,
    "semidecreasing": _check_semidecreasing,
    "boundary-budget": _check_budget,
    "first-variation": _check_first_variation,
    "angle": _check_angle,
    "trace": _check_trace,
    "nonconcentration": _check_nonconcentration,
    "monotonicity": _check_monotonicity,
}


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def analyze(run_dir, checks=("all",), out=None) -> dict:
    """Run the requested checks on a run directory.

    Writes ``<check>.csv`` per check and ``summary.json`` (check name, pass
    flag, worst residual, constants) to ``out`` (default: ``run_dir/analysis``).
    """
    run_dir = Path(run_dir)
    out = Path(out) if out is not None else run_dir / "analysis"
    names = list(ALL_CHECKS) if "all" in checks else list(checks)
    for n in names:
        if n not in CHECKS:
            raise ConfigError(f"unknown check {n!r} (choose from {', '.join(ALL_CHECKS)}, all)")
    rec, cfg = load_record(run_dir)
    params = _analysis_params(cfg, rec)
    packs = [MeasurePack(f) for f in rec.snapshots()]
    summary = {"config_sha256": rec.config_hash, "epsilon": rec.epsilon, "checks": {}}
    for n in names:
        result, columns, rows = CHECKS[n](rec, params, packs)
        write_csv(out / f"{n}.csv", columns, rows, rec.config_hash)
        summary["checks"][n] = _sanitize(result)
    summary["passed"] = all(c["passed"] for c in summary["checks"].values())
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return summary


# -- sweeps ---------------------------------------------------------------------------------------------------

SWEEP_COLUMNS = ["epsilon", "h", "diagnostic_time", "abs_discrepancy", "tubular_mass", "delta", "trace_gap",
                 "angle_deg", "angle_error_deg", "budget", "budget_C", "mono_C1_max", "mono_C2_max"]


def _sweep_job(args):
    data, out, checks = args
    cfg = validate_run(data)
    info = execute_run(cfg, out)
    summary = analyze(out, checks, Path(out) / "analysis")
    return info, summary


def _strictly_decreasing(v) -> bool:
    v = [x for x in v]
    return all(b < a for a, b in zip(v, v[1:]))


def sweep(cfg: SweepConfig, out, jobs: int | None = None, checks=("all",)) -> dict:
    """Run every epsilon of a sweep, analyse each run, and write ``sweep_summary.csv``.

    Runs may execute concurrently (``jobs`` worker processes); every job
    writes only to its own ``eps_<k>`` directory and the summary is built
    afterwards in epsilon order, so the artifacts do not depend on ``jobs``.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    eps = cfg.epsilons
    if jobs is None:
        jobs = min(len(eps), os.cpu_count() or 1)
    names = list(ALL_CHECKS) if "all" in checks else list(checks)
    for n in ("nonconcentration", "trace", "angle", "boundary-budget"):
        if n not in names:
            names.append(n)
    tasks = [(r.data, str(out / f"eps_{k}"), tuple(names)) for k, r in enumerate(cfg.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_job, tasks))
    else:
        results = [_sweep_job(t) for t in tasks]
    rows = []
    for k, (info, summ) in enumerate(results):
        c = summ["checks"]
        rc = cfg.runs[k]
        dom = make_domain(rc["domain"])
        nc = c["nonconcentration"]
        tm = nc["tubular_mass_at_diagnostic_time"]
        delta_key = sorted(tm, key=float)[0]
        ang = c["angle"]
        mono = c.get("monotonicity", {}).get("constants", [])
        rows.append({
            "epsilon": rc["epsilon"], "h": dom.spacing,
            "diagnostic_time": ang.get("time", float("nan")),
            "abs_discrepancy": nc["abs_discrepancy_at_diagnostic_time"],
            "tubular_mass": tm[delta_key], "delta": float(delta_key),
            "trace_gap": c["trace"]["value_at_diagnostic_time"],
            "angle_deg": ang.get("target_deg", float("nan")),
            "angle_error_deg": ang.get("mean_error_deg", float("nan")) if ang.get("contacts") else float("nan"),
            "budget": c["boundary-budget"]["value"], "budget_C": c["boundary-budget"]["constants"]["C"],
            "mono_C1_max": max((m["C1"] for m in mono), default=float("nan")),
            "mono_C2_max": max((m["C2"] for m in mono), default=float("nan")),
        })
    write_csv(out / "sweep_summary.csv", SWEEP_COLUMNS, rows, cfg.hash)
    Cs = [r["budget_C"] for r in rows]
    trends = {
        "abs_discrepancy_decreasing": _strictly_decreasing([r["abs_discrepancy"] for r in rows]),
        "tubular_mass_decreasing": _strictly_decreasing([r["tubular_mass"] for r in rows]),
        "trace_gap_decreasing": _strictly_decreasing([r["trace_gap"] for r in rows]),
        "angle_error_decreasing": _strictly_decreasing([r["angle_error_deg"] for r in rows]),
        "budget_C_ratio": (max(Cs) / min(Cs)) if min(Cs) > 0 else (1.0 if max(Cs) == 0 else float("inf")),
    }
    summary = {"config_sha256": cfg.hash, "epsilons": eps, "trends": _sanitize(trends),
               "runs_passed": [s["passed"] for _, s in results]}
    (out / "sweep_summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n",
                                            encoding="utf-8")
    return summary
