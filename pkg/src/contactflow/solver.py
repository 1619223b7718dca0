"""Linearly implicit time stepping of the Allen-Cahn flow with contact-energy boundary.

The discrete energy on a finite-volume grid is

    E_h(u) = eps/2 * sum_f T_f (u_i - u_j)^2 + sum_K |K| W(u_K)/eps + sum_b w_b sigma(u_b),

and one step solves the symmetric positive-definite system

    (M/dt + L) (u_new - u) = -grad E_h(u) / eps,

with ``M`` the diagonal of cell volumes and ``L`` the graph Laplacian.  The
Laplacian is implicit and the reaction and boundary terms are explicit.  The
boundary value ``u_b`` is either the boundary-adjacent cell value
(``"adjacent"``) or the mean of that value and its ghost
(``"averaged"``), ``u_b = u_K - (d_b/eps) sigma'(u_K)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import splu

from .energetics import EnergyModel, heteroclinic_profile
from .errors import ParameterError, StepError
from .geometry import DomainGeometry

OVERSHOOT_TOL = 0.1
MAX_HALVINGS = 8
BOUNDARY_VARIANTS = ("adjacent", "averaged")


@dataclass(frozen=True, eq=False)
class PhaseField:
    """Cell values of the order parameter at one time.

    ``step_index`` counts base steps from the start of the trajectory; the
    time of step ``k`` is ``k * dt`` except for a final shortened step.
    """

    domain: DomainGeometry
    model: EnergyModel
    epsilon: float
    values: np.ndarray
    time: float = 0.0
    step_index: int = 0
    boundary: str = "adjacent"

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ParameterError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.boundary not in BOUNDARY_VARIANTS:
            raise ParameterError(f"boundary variant must be one of {BOUNDARY_VARIANTS}")
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.shape != (self.domain.n_cells,):
            raise ParameterError(f"values must have shape ({self.domain.n_cells},), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values, time=None, step_index=None) -> "PhaseField":
        return replace(
            self, values=values,
            time=self.time if time is None else time,
            step_index=self.step_index if step_index is None else step_index,
        )


# -- discrete energy ------------------------------------------------------------

def boundary_values(field: PhaseField, u: np.ndarray | None = None) -> np.ndarray:
    """Boundary values ``u_b`` under the field's boundary variant."""
    u = field.values if u is None else u
    dom = field.domain
    ui = u[dom.b_cell]
    if field.boundary == "adjacent":
        return ui
    return ui - (dom.b_dist / field.epsilon) * field.model.sigma_p(ui)


def dirichlet_energy(field: PhaseField, u: np.ndarray | None = None) -> float:
    u = field.values if u is None else u
    dom = field.domain
    du = u[dom.face_i] - u[dom.face_j]
    return 0.5 * field.epsilon * float(np.sum(dom.face_trans * du * du))


def interior_energy(field: PhaseField, u: np.ndarray | None = None) -> float:
    """``eps/2 sum T du^2 + sum |K| W(u)/eps``."""
    u = field.values if u is None else u
    pot = float(np.sum(field.domain.volumes * field.model.W(u))) / field.epsilon
    return dirichlet_energy(field, u) + pot


def boundary_energy(field: PhaseField, u: np.ndarray | None = None) -> float:
    """``sum_b w_b sigma(u_b)``."""
    ub = boundary_values(field, u)
    return float(np.sum(field.domain.b_weight * field.model.sigma(ub)))


def total_energy(field: PhaseField, u: np.ndarray | None = None) -> float:
    return interior_energy(field, u) + boundary_energy(field, u)


def boundary_gradient(field: PhaseField, u: np.ndarray | None = None) -> np.ndarray:
    """Gradient at boundary nodes: normal part from the boundary condition,
    tangential part from centred differences of ``u_b`` along the boundary."""
    ub = boundary_values(field, u)
    dom = field.domain
    normal = -(field.model.sigma_p(ub) / field.epsilon)[:, None] * dom.b_normal
    return normal + dom.boundary_tangential_derivative(ub)


def boundary_density(field: PhaseField, u: np.ndarray | None = None) -> np.ndarray:
    """``eps |grad u|^2 / 2 + W(u) / eps`` at boundary nodes."""
    ub = boundary_values(field, u)
    g = boundary_gradient(field, u)
    return 0.5 * field.epsilon * np.sum(g * g, axis=1) + field.model.W(ub) / field.epsilon


def boundary_density_integral(field: PhaseField, u: np.ndarray | None = None) -> float:
    return float(np.sum(boundary_density(field, u) * field.domain.b_weight))


def energy_gradient(field: PhaseField, u: np.ndarray | None = None) -> np.ndarray:
    """Gradient of the discrete energy with respect to the cell values."""
    u = field.values if u is None else u
    dom, model, eps = field.domain, field.model, field.epsilon
    # face fluxes rather than stiffness @ u: exact zero on constant states
    flux_f = dom.face_trans * (u[dom.face_i] - u[dom.face_j])
    lap = np.bincount(dom.face_i, weights=flux_f, minlength=dom.n_cells)
    lap -= np.bincount(dom.face_j, weights=flux_f, minlength=dom.n_cells)
    g = eps * lap + dom.volumes * model.Wp(u) / eps
    ui = u[dom.b_cell]
    if field.boundary == "adjacent":
        flux = dom.b_weight * model.sigma_p(ui)
    else:
        ub = ui - (dom.b_dist / eps) * model.sigma_p(ui)
        flux = dom.b_weight * model.sigma_p(ub) * (1.0 - (dom.b_dist / eps) * model.sigma_pp(ui))
    return g + np.bincount(dom.b_cell, weights=flux, minlength=dom.n_cells)


def pde_rhs(field: PhaseField, u: np.ndarray | None = None) -> np.ndarray:
    """Discrete ``eps * du/dt = eps Lap u - W'(u)/eps`` with the boundary flux."""
    return -energy_gradient(field, u) / field.domain.volumes


def stability_cap(model: EnergyModel, epsilon: float) -> float:
    """Largest admissible step ``0.4 eps^2 / max |W''|`` on ``[-1.1, 1.1]``."""
    return 0.4 * epsilon**2 / model.max_abs_Wpp(1.0 + OVERSHOOT_TOL)


# -- stepping -------------------------------------------------------------------

class Stepper:
    """Holds factorised step matrices for one (domain, model, eps, variant)."""

    def __init__(self, domain: DomainGeometry, model: EnergyModel, epsilon: float, boundary: str = "adjacent"):
        self.domain, self.model, self.epsilon, self.boundary = domain, model, epsilon, boundary
        self.cap = stability_cap(model, epsilon)
        self._factors: dict[float, object] = {}

    def _factor(self, dt: float):
        lu = self._factors.get(dt)
        if lu is None:
            A = (diags(self.domain.volumes / dt) + self.domain.stiffness).tocsc()
            try:
                lu = splu(A)
            except RuntimeError as exc:  # singular factor
                raise StepError(f"factorisation failed for dt={dt!r}: {exc}") from exc
            if len(self._factors) > 16:
                self._factors.clear()
            self._factors[dt] = lu
        return lu

    def increment(self, field: PhaseField, u: np.ndarray, dt: float) -> np.ndarray:
        rhs = -energy_gradient(field, u) / self.epsilon
        du = self._factor(dt).solve(rhs)
        if not np.all(np.isfinite(du)):
            raise StepError("linear solve returned non-finite values")
        return du

    def advance(self, field: PhaseField, dt: float, tol: float) -> tuple[np.ndarray, int]:
        """New values after ``dt``, subdividing into ``2^m`` substeps on rejection."""
        u0 = field.values
        e0 = total_energy(field, u0)
        last = ""
        for m in range(MAX_HALVINGS + 1):
            n_sub = 2**m
            h = dt / n_sub
            u, e_prev, ok = u0, e0, True
            for _ in range(n_sub):
                u_new = u + self.increment(field, u, h)
                if np.max(np.abs(u_new)) > 1.0 + OVERSHOOT_TOL:
                    ok, last = False, f"overshoot max|u| = {np.max(np.abs(u_new)):.6g}"
                    break
                e_new = total_energy(field, u_new)
                if e_new > e_prev + tol:
                    ok, last = False, f"energy increase {e_new - e_prev:.3e} > tol {tol:.1e}"
                    break
                u, e_prev = u_new, e_new
            if ok:
                return u, n_sub
        raise StepError(f"step rejected after {MAX_HALVINGS} halvings of dt={dt!r}: {last}")


_STEPPERS: dict[tuple, Stepper] = {}


def get_stepper(field: PhaseField) -> Stepper:
    key = (id(field.domain), id(field.model), field.epsilon, field.boundary)
    st = _STEPPERS.get(key)
    if st is None or st.domain is not field.domain or st.model is not field.model:
        if len(_STEPPERS) > 8:
            _STEPPERS.clear()
        st = Stepper(field.domain, field.model, field.epsilon, field.boundary)
        _STEPPERS[key] = st
    return st


def step(field: PhaseField, dt: float, tol: float | None = None) -> PhaseField:
    """Advance one time step.

    Parameters
    ----------
    field : PhaseField
    dt : float
        Step size in ``(0, cap]`` with ``cap = 0.4 eps^2 / max|W''|``.
    tol : float, optional
        Accepted energy increase per step; defaults to
        ``1e-10 * max(1, E(field))``.

    Raises
    ------
    StepError
        If the step is still rejected after eight halvings.
    """
    stepper = get_stepper(field)
    if not (dt > 0.0) or dt > stepper.cap * (1 + 1e-12):
        raise ParameterError(f"dt must lie in (0, {stepper.cap:.6g}], got {dt!r}")
    if tol is None:
        tol = 1e-10 * max(1.0, total_energy(field))
    u, _ = stepper.advance(field, dt, tol)
    return field.with_values(u, time=field.time + dt, step_index=field.step_index + 1)


# -- initial data -----------------------------------------------------------------

def _interface_distance(domain: DomainGeometry, spec: dict) -> np.ndarray:
    """Signed distance to an interface, positive on the ``u = +1`` side."""
    x = domain.centers
    shape = spec.get("shape", "plane")
    if shape == "plane":
        normal = np.asarray(spec["normal"], float)
        normal = normal / np.linalg.norm(normal)
        point = np.asarray(spec["point"], float)
        return (x - point) @ normal
    if shape == "point":
        orient = float(spec.get("orientation", 1.0))
        return orient * (x[:, 0] - float(spec["x0"]))
    if shape == "circle":
        c = np.asarray(spec["center"], float)
        return float(spec["radius"]) - np.linalg.norm(x - c, axis=1)
    if shape == "band":
        lo, hi = float(spec["lower"]), float(spec["upper"])
        axis = int(spec.get("axis", 0))
        xs = x[:, axis]
        period = spec.get("period")
        if period is not None:
            period = float(period)
            mid = 0.5 * (lo + hi)
            xs = mid + np.mod(xs - mid + 0.5 * period, period) - 0.5 * period
        return np.minimum(xs - lo, hi - xs)
    raise ParameterError(f"unknown interface shape {shape!r}")


def initial_profile(
    domain: DomainGeometry,
    model: EnergyModel,
    epsilon: float,
    kind: str,
    params: dict | None = None,
    E0: float | None = None,
    boundary: str = "adjacent",
) -> PhaseField:
    """Build initial data.

    Kinds
    -----
    ``well_prepared_interface``
        ``u = q(d / eps)`` with ``q`` the heteroclinic profile and ``d`` the
        signed distance to ``params["interface"]``.
    ``constant``
        ``u = params["value"]``.
    ``smoothed_indicator``
        ``u = erf(d / params["width"])`` for the same interface shapes.
    ``random_seeded``
        ``u = params["amplitude"] * U(-1, 1)`` from ``params["seed"]``.

    Raises
    ------
    ParameterError
        If the energy exceeds the declared bound ``E0`` or ``max|u| > 1``.
    """
    params = dict(params or {})
    if kind == "well_prepared_interface":
        d = _interface_distance(domain, params["interface"])
        u = heteroclinic_profile(model)(d / epsilon)
    elif kind == "constant":
        u = np.full(domain.n_cells, float(params.get("value", 1.0)))
    elif kind == "smoothed_indicator":
        from scipy.special import erf

        d = _interface_distance(domain, params["interface"])
        u = erf(d / float(params.get("width", 2 * epsilon)))
    elif kind == "random_seeded":
        rng = np.random.default_rng(int(params.get("seed", 0)))
        u = float(params.get("amplitude", 0.1)) * rng.uniform(-1.0, 1.0, domain.n_cells)
    else:
        raise ParameterError(f"unknown initial profile kind {kind!r}")
    u = np.asarray(u, dtype=float)
    if np.max(np.abs(u)) > 1.0 + 1e-14:
        raise ParameterError(f"initial data must satisfy max|u| <= 1, got {np.max(np.abs(u)):.6g}")
    fld = PhaseField(domain, model, float(epsilon), u, 0.0, 0, boundary)
    if E0 is not None:
        e = total_energy(fld)
        if e > E0:
            raise ParameterError(f"initial energy {e:.10g} exceeds declared E0 = {E0:.10g}")
    return fld


# -- trajectories -------------------------------------------------------------------

@dataclass(eq=False)
class RunRecord:
    """Trajectory snapshots and per-step scalar series.

    ``times``, ``energy``, ``interior_energy``, ``boundary_energy``,
    ``abs_discrepancy`` and ``boundary_density`` (the boundary integral of
    ``eps |grad u|^2 / 2 + W / eps``) have one entry per recorded time,
    starting at the initial state.  ``dissipation``, ``step_sizes`` and ``substeps`` have one
    entry per step.
    """

    domain: DomainGeometry
    model: EnergyModel
    epsilon: float
    boundary: str
    base_dt: float
    E0: float
    config_hash: str = ""
    step_indices: list = field(default_factory=list)
    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    interior_energy: list = field(default_factory=list)
    boundary_energy: list = field(default_factory=list)
    abs_discrepancy: list = field(default_factory=list)
    boundary_density: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    substeps: list = field(default_factory=list)
    snapshot_steps: list = field(default_factory=list)
    snapshot_times: list = field(default_factory=list)
    snapshot_values: list = field(default_factory=list)

    def snapshot(self, k: int) -> PhaseField:
        """The ``k``-th stored snapshot as a :class:`PhaseField`."""
        return PhaseField(self.domain, self.model, self.epsilon, self.snapshot_values[k],
                          self.snapshot_times[k], self.snapshot_steps[k], self.boundary)

    def snapshots(self):
        for k in range(len(self.snapshot_steps)):
            yield self.snapshot(k)

    def final(self) -> PhaseField:
        return self.snapshot(len(self.snapshot_steps) - 1)

    def as_arrays(self) -> dict:
        return {k: np.asarray(getattr(self, k)) for k in (
            "times", "energy", "interior_energy", "boundary_energy", "abs_discrepancy",
            "boundary_density", "dissipation", "step_sizes", "substeps")}

    def snapshot_index_at(self, t: float) -> int:
        """Index of the stored snapshot nearest to time ``t``."""
        st = np.asarray(self.snapshot_times)
        return int(np.argmin(np.abs(st - t)))


def abs_discrepancy_of(field: PhaseField, u: np.ndarray | None = None) -> float:
    u = field.values if u is None else u
    dom = field.domain
    g2 = dom.face_gradient_sq(u)
    xi = 0.5 * field.epsilon * g2 - field.model.W(u) / field.epsilon
    return float(np.sum(np.abs(xi) * dom.volumes))


def step_schedule(t_start_index: int, base_dt: float, t_final: float) -> list[tuple[int, float]]:
    """Remaining ``(step_index, end_time)`` pairs on the grid ``k * dt``, ending at ``t_final``."""
    n_total = max(int(math.ceil(t_final / base_dt - 1e-9)), 0)
    out = []
    for k in range(t_start_index, n_total):
        t_end = (k + 1) * base_dt
        if k + 1 == n_total:
            t_end = t_final
        out.append((k + 1, t_end))
    return out


def run(
    initial: PhaseField,
    t_final: float,
    dt: float | None = None,
    snapshot_every: int | None = None,
    snapshot_steps=None,
    E0: float | None = None,
    config_hash: str = "",
    callback: Callable[[PhaseField], None] | None = None,
) -> RunRecord:
    """Integrate from ``initial`` to ``t_final``.

    Parameters
    ----------
    initial : PhaseField
        Starting state; its ``step_index`` positions it on the time grid, so a
        checkpointed state resumes onto exactly the same grid.
    t_final : float
    dt : float, optional
        Base step, defaults to the stability cap.
    snapshot_every : int, optional
        Store a snapshot every this many base steps (the start and the final
        state are always stored).
    snapshot_steps : iterable of int, optional
        Additional step indices to store.
    E0 : float, optional
        Declared energy bound; sets the per-step tolerance
        ``1e-10 * max(1, E0)``.  Defaults to the initial energy.
    """
    stepper = get_stepper(initial)
    if dt is None:
        dt = stepper.cap
    if not (dt > 0.0) or dt > stepper.cap * (1 + 1e-12):
        raise ParameterError(f"dt must lie in (0, {stepper.cap:.6g}], got {dt!r}")
    e_init = total_energy(initial)
    if E0 is None:
        E0 = e_init
    tol = 1e-10 * max(1.0, E0)
    wanted = set(int(s) for s in (snapshot_steps or ()))

    rec = RunRecord(initial.domain, initial.model, initial.epsilon, initial.boundary, float(dt), float(E0), config_hash)

    def record_state(fld: PhaseField, snap: bool):
        u = fld.values
        ie = interior_energy(fld, u)
        be = boundary_energy(fld, u)
        rec.step_indices.append(fld.step_index)
        rec.times.append(fld.time)
        rec.interior_energy.append(ie)
        rec.boundary_energy.append(be)
        rec.energy.append(ie + be)
        rec.abs_discrepancy.append(abs_discrepancy_of(fld, u))
        rec.boundary_density.append(boundary_density_integral(fld, u))
        if snap:
            rec.snapshot_steps.append(fld.step_index)
            rec.snapshot_times.append(fld.time)
            rec.snapshot_values.append(u)

    record_state(initial, True)
    fld = initial
    schedule = step_schedule(initial.step_index, dt, t_final)
    vol_eps = initial.domain.volumes * initial.epsilon
    for i, (k, t_end) in enumerate(schedule):
        h = t_end - fld.time
        u_new, n_sub = stepper.advance(fld, h, tol)
        ut = (u_new - fld.values) / h
        rec.dissipation.append(float(np.sum(vol_eps * ut * ut)))
        rec.step_sizes.append(h)
        rec.substeps.append(n_sub)
        fld = fld.with_values(u_new, time=t_end, step_index=k)
        last = i == len(schedule) - 1
        snap = last or k in wanted or (snapshot_every is not None and k % snapshot_every == 0)
        record_state(fld, snap)
        if callback is not None:
            callback(fld)
    return rec


def frozen_record(field: PhaseField, times) -> RunRecord:
    """A record holding ``field`` unchanged at every time in ``times``.

    Diagnostic-only: lets functionals of a trajectory be evaluated on a
    prescribed state that is not a solution.
    """
    rec = RunRecord(field.domain, field.model, field.epsilon, field.boundary,
                    float(np.max(np.diff(times))) if len(times) > 1 else 0.0, total_energy(field))
    u = field.values
    ie, be = interior_energy(field, u), boundary_energy(field, u)
    ad, bd = abs_discrepancy_of(field, u), boundary_density_integral(field, u)
    for k, t in enumerate(times):
        rec.step_indices.append(k)
        rec.times.append(float(t))
        rec.interior_energy.append(ie)
        rec.boundary_energy.append(be)
        rec.energy.append(ie + be)
        rec.abs_discrepancy.append(ad)
        rec.boundary_density.append(bd)
        rec.snapshot_steps.append(k)
        rec.snapshot_times.append(float(t))
        rec.snapshot_values.append(u)
        if k:
            rec.dissipation.append(0.0)
            rec.step_sizes.append(float(t - times[k - 1]))
            rec.substeps.append(1)
    return rec


def dissipation_residual(record: RunRecord, t_index: int) -> float:
    """``|(E_k - E_{k-1})/dt + int eps u_t^2|`` over the step ending at ``t_index``."""
    n = len(record.dissipation)
    if not (1 <= t_index <= n):
        raise ParameterError(f"t_index must lie in [1, {n}], got {t_index}")
    dE = record.energy[t_index] - record.energy[t_index - 1]
    h = record.step_sizes[t_index - 1]
    return abs(dE / h + record.dissipation[t_index - 1])


def pde_residual(field: PhaseField) -> float:
    """Max-norm of the discrete right-hand side; zero for discrete steady states."""
    return float(np.max(np.abs(pde_rhs(field))))
