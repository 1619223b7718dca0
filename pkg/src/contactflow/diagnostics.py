"""Checkers for boundary-energy control, contact angles, traces and monotonicity.

The kernel machinery follows the reflected-kernel construction near the
boundary: the (n-1)-dimensional backwards heat kernel ``rho``, a radial
cutoff ``eta`` equal to one on ``B_{kappa/4}`` and supported in
``B_{kappa/2}``, and the truncated kernels

    rho1(x, t) = eta(x - y) rho(x, t),
    rho2(x, t) = eta(x~ - y) rho(x~, t)   for x in N_kappa, else 0,

where ``x~`` is the reflection of ``x`` across the boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import HypothesisError, InsufficientResolutionError, ParameterError, ResolutionError
from .geometry import Disk2D, DomainGeometry
from .measures import MeasurePack, abs_discrepancy_integral, tubular_mass
from .solver import PhaseField, RunRecord, boundary_values

FIT_GRID = 10.0 ** np.linspace(-3.0, 6.0, 9 * 32 + 1)


# -- heat kernel ---------------------------------------------------------------------

@dataclass
class KernelValues:
    """Kernel value with analytic derivatives at a batch of points.

    ``grad`` has shape ``(N, n)``, ``hess`` ``(N, n, n)``; ``dt`` is the
    time derivative.
    """

    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    dt: np.ndarray


def heat_kernel(x, t: float, y, s: float, derivatives: bool = False):
    """Backwards heat kernel ``(4 pi (s-t))^{-(n-1)/2} exp(-|x-y|^2 / (4 (s-t)))``.

    Parameters
    ----------
    x : array_like, shape (N, n) or (n,)
    t, s : float
        Evaluation and terminal times, ``t < s``.  ``t`` may also be an array
        broadcastable against the points.
    y : array_like, shape (n,)
    derivatives : bool
        Return a :class:`KernelValues` with gradient, Hessian and time
        derivative instead of the bare value.
    """
    x = np.asarray(x, float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    y = np.asarray(y, float)
    tau = np.asarray(s - np.asarray(t, float), float)
    if np.any(tau <= 0):
        raise ParameterError("heat kernel requires t < s")
    n = x.shape[1]
    d = x - y
    r2 = np.sum(d * d, axis=1)
    rho = (4 * math.pi * tau) ** (-(n - 1) / 2) * np.exp(-r2 / (4 * tau))
    if not derivatives:
        return float(rho[0]) if single else rho
    tau_b = np.broadcast_to(tau, rho.shape)
    grad = -(d / (2 * tau_b[:, None])) * rho[:, None]
    eye = np.eye(n)
    hess = (-eye / (2 * tau_b[:, None, None])
            + np.einsum("ni,nj->nij", d, d) / (4 * tau_b[:, None, None] ** 2)) * rho[:, None, None]
    dt = ((n - 1) / (2 * tau_b) - r2 / (4 * tau_b**2)) * rho
    return KernelValues(rho, grad, hess, dt)


def ilmanen_residual(x, t, a, y, s) -> np.ndarray:
    """``(a . grad rho)^2 / rho + (I - a a) : hess rho + rho_t`` for unit vectors ``a``."""
    kv = heat_kernel(x, t, y, s, derivatives=True)
    a = np.atleast_2d(np.asarray(a, float))
    ag = np.sum(a * kv.grad, axis=1)
    n = a.shape[1]
    proj = np.eye(n) - np.einsum("ni,nj->nij", a, a)
    return ag * ag / kv.value + np.einsum("nij,nij->n", proj, kv.hess) + kv.dt


def kernel_boundary_identity_residual(domain: DomainGeometry, y, s: float, t: float, x) -> np.ndarray:
    """``|rho_t + tangential Laplacian of rho - RHS|`` at boundary points ``x``.

    RHS is ``-((x-y).nu)^2 / (4 (s-t)^2) rho - ((x-y).H) / (2 (s-t)) rho``.
    On a disk the tangential Laplacian is computed from the circle
    parametrisation ``f(phi) = rho(R cos phi, R sin phi)`` as ``f''/R^2``;
    on flat boundaries from the tangential trace of the Hessian.
    """
    x = np.atleast_2d(np.asarray(x, float))
    y = np.asarray(y, float)
    tau = s - t
    if tau <= 0:
        raise ParameterError("requires t < s")
    nu = domain.outward_normal_at(x) if domain.dim > 1 else np.atleast_2d(domain.outward_normal_at(x[:, 0]))
    nu = nu.reshape(x.shape)
    kv = heat_kernel(x, t, y, s, derivatives=True)
    rho = kv.value
    d = x - y
    if isinstance(domain, Disk2D):
        R = domain.R
        phi = np.arctan2(x[:, 1], x[:, 0])
        g1 = 2 * R * (y[0] * np.sin(phi) - y[1] * np.cos(phi))
        g2 = 2 * R * (y[0] * np.cos(phi) + y[1] * np.sin(phi))
        lap_t = (-g2 / (4 * tau) + g1 * g1 / (16 * tau * tau)) * rho / R**2
        H = -nu / R
    else:
        n = x.shape[1]
        lap_t = np.zeros(len(x))
        if n == 2:
            tang = np.stack([-nu[:, 1], nu[:, 0]], axis=1)
            lap_t = np.einsum("ni,nij,nj->n", tang, kv.hess, tang)
        H = np.zeros_like(x)
        lap_t = lap_t + np.sum(H * kv.grad, axis=1)
    lhs = kv.dt + lap_t
    rhs = -(np.sum(d * nu, axis=1) ** 2) / (4 * tau * tau) * rho - np.sum(d * H, axis=1) / (2 * tau) * rho
    return np.abs(lhs - rhs)


# -- cutoff and truncated kernels ------------------------------------------------------

def _psi(z):
    z = np.asarray(z, float)
    out = np.zeros_like(z)
    pos = z > 0
    out[pos] = np.exp(-1.0 / z[pos])
    return out


def smooth_step(z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``f = psi(z) / (psi(z) + psi(1 - z))`` with ``psi(z) = exp(-1/z)``, and ``f'``, ``f''``."""
    z = np.asarray(z, float)
    A, B = _psi(z), _psi(1 - z)
    zs = np.where(z > 0, z, 1.0)
    ws = np.where(1 - z > 0, 1 - z, 1.0)
    A1 = A / zs**2
    A2 = A * (1 / zs**4 - 2 / zs**3)
    B1 = -B / ws**2
    B2 = B * (1 / ws**4 - 2 / ws**3)
    S = A + B
    f = A / S
    num = A1 * B - A * B1
    f1 = num / S**2
    f2 = (A2 * B - A * B2) / S**2 - 2 * num * (A1 + B1) / S**3
    return f, f1, f2


@dataclass(frozen=True)
class Cutoff:
    """Radial ``C^inf`` cutoff, one on ``B_{r_in}`` and zero outside ``B_{r_out}``."""

    r_in: float
    r_out: float

    def radial(self, r):
        """``eta``, ``d eta/dr`` and ``d^2 eta/dr^2`` as functions of ``r = |x|``."""
        w = self.r_out - self.r_in
        f, f1, f2 = smooth_step((self.r_out - np.asarray(r, float)) / w)
        return f, -f1 / w, f2 / (w * w)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        return self.radial(np.linalg.norm(x, axis=1))[0]

    def derivatives(self, x):
        """Value, gradient ``(N, n)`` and Hessian ``(N, n, n)``."""
        x = np.atleast_2d(np.asarray(x, float))
        r = np.linalg.norm(x, axis=1)
        f, fr, frr = self.radial(r)
        rs = np.where(r > 0, r, 1.0)
        xh = x / rs[:, None]
        P = np.einsum("ni,nj->nij", xh, xh)
        n = x.shape[1]
        grad = fr[:, None] * xh
        hess = frr[:, None, None] * P + (fr / rs)[:, None, None] * (np.eye(n) - P)
        return f, grad, hess


@dataclass(frozen=True)
class KernelSpec:
    """Centre ``y``, terminal time ``s`` and variant of a truncated kernel.

    ``variant`` is ``"pair"`` (``rho1 + rho2``, centre within ``kappa/2`` of
    the boundary), ``"rho2"`` (reflected part alone, same condition) or
    ``"rho1"`` (interior kernel, centre at least ``kappa/2`` from the boundary).
    """

    domain: DomainGeometry
    center: tuple
    s: float
    variant: str = "pair"

    def __post_init__(self):
        if self.variant not in ("rho1", "rho2", "pair"):
            raise ParameterError(f"unknown kernel variant {self.variant!r}")
        dist = self.domain.signed_distance(np.asarray(self.center, float))
        half = 0.5 * self.domain.kappa
        if self.variant in ("pair", "rho2") and not dist < half:
            raise ParameterError(
                f"variant {self.variant!r} needs the centre within kappa/2 = {half:.6g} of the boundary; "
                f"distance is {dist:.6g}")
        if self.variant == "rho1" and dist < half:
            raise ParameterError(
                f"interior variant needs the centre at least kappa/2 = {half:.6g} from the boundary; "
                f"distance is {dist:.6g}")

    @property
    def cutoff(self) -> Cutoff:
        return Cutoff(0.25 * self.domain.kappa, 0.5 * self.domain.kappa)

    @property
    def y(self) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.center, float))


def truncated_kernels(spec: KernelSpec, x, t: float, gradient: bool = False):
    """``(rho1, rho2)`` at points ``x``; with ``gradient=True`` also their gradients."""
    if not t < spec.s:
        raise ParameterError("truncated kernels require t < s")
    dom = spec.domain
    x = np.asarray(x, float)
    if dom.dim == 1 and (x.ndim == 1 and x.shape[-1] != 1 or x.ndim == 0):
        x = x.reshape(-1, 1)
    x = np.atleast_2d(x)
    y = spec.y
    eta = spec.cutoff
    if gradient:
        e1, ge1, _ = eta.derivatives(x - y)
        k1 = heat_kernel(x, t, y, spec.s, derivatives=True)
        rho1 = e1 * k1.value
        g1 = ge1 * k1.value[:, None] + e1[:, None] * k1.grad
    else:
        rho1 = eta(x - y) * heat_kernel(x, t, y, spec.s)
    rho2 = np.zeros(len(x))
    g2 = np.zeros_like(x)
    if spec.variant != "rho1":
        dist = np.maximum(dom._distance(x), 0.0)
        inside = dist < dom.kappa
        if np.any(inside):
            xi = x[inside]
            xr = dom.reflect_unchecked(xi)
            if gradient:
                e2, ge2, _ = eta.derivatives(xr - y)
                k2 = heat_kernel(xr, t, y, spec.s, derivatives=True)
                rho2[inside] = e2 * k2.value
                gr = ge2 * k2.value[:, None] + e2[:, None] * k2.grad
                D = dom.reflect_jacobian(xi)
                g2[inside] = np.einsum("nji,nj->ni", D, gr)
            else:
                rho2[inside] = eta(xr - y) * heat_kernel(xr, t, y, spec.s)
    if gradient:
        return rho1, rho2, g1, g2
    return rho1, rho2


def kernel_weight(spec: KernelSpec, x, t: float) -> np.ndarray:
    """The weight used by the monotonicity check: ``rho1 + rho2`` or ``rho1``."""
    r1, r2 = truncated_kernels(spec, x, t)
    if spec.variant == "rho1":
        return r1
    if spec.variant == "rho2":
        return r2
    return r1 + r2


# -- monotonicity -------------------------------------------------------------------------

@dataclass
class MonotonicityReport:
    """Per-interval samples of the monotonicity inequality and fitted constants.

    ``mass`` is ``mu_t(weight)`` at the stored times; ``lhs`` and ``rhs`` are
    evaluated at the fitted constants on each interval midpoint
    ``t_mid``.  ``discrepancy_term`` is ``int weight / (2 (s - t)) d xi`` at
    the midpoint.
    """

    variant: str
    center: tuple
    s: float
    times: np.ndarray
    t_mid: np.ndarray
    mass: np.ndarray
    discrepancy_term: np.ndarray
    C1: float
    C2: float
    lhs: np.ndarray
    rhs: np.ndarray
    violations: int
    user_constants: tuple
    user_violations: int
    user_worst: float
    tolerance: float
    feasible: bool = True
    refinement_tag: str = ""
    required_C2: float = field(default=float("nan"))

    @property
    def passed_user(self) -> bool:
        return self.user_violations == 0


def _sides(mass, times, t_mid, disc, s, C1):
    w = np.exp(C1 * (s - times) ** 0.25)
    wm = np.exp(C1 * (s - t_mid) ** 0.25)
    lhs = np.diff(w * mass) / np.diff(times)
    return lhs, wm, wm * disc


def monotonicity_check(
    record: RunRecord,
    spec: KernelSpec,
    window: tuple[float, float] | None = None,
    C1: float = 1.0,
    C2: float = 1.0,
    refinement_tag: str = "",
    packs: Sequence[MeasurePack] | None = None,
) -> MonotonicityReport:
    """Check the weighted monotonicity inequality on adjacent stored snapshots.

    ``G(t) = exp(C1 (s-t)^{1/4}) mu_t(rho1 + rho2)`` is differenced between
    adjacent snapshots and compared with
    ``exp(C1 (s-t_m)^{1/4}) (int (rho1+rho2)/(2(s-t_m)) d xi_m + C2)`` at the
    midpoint, where ``xi_m`` averages the two snapshots' discrepancy.  For
    the interior variant the weight is ``rho1``, the measure is the interior
    energy and no exponential factor is used (reported ``C1 = 0``).

    The minimal constants are fitted lexicographically (``C1`` first) on a
    log grid of 32 points per decade over ``[1e-3, 1e6]``.

    ``packs`` may hold precomputed :class:`MeasurePack` objects for every
    stored snapshot, to share work across several kernel specs.

    Raises
    ------
    HypothesisError
        If ``sigma`` changes sign on ``[-1, 1]``.
    ResolutionError
        If the window comes closer than four base steps to ``s``, or holds
        fewer than two snapshots.
    """
    sgrid = np.linspace(-1.0, 1.0, 2001)
    sig = record.model.sigma(sgrid)
    if np.min(sig) < -1e-14 * max(1.0, float(np.max(np.abs(sig)))):
        raise HypothesisError("the monotonicity inequality requires sigma >= 0 on [-1, 1]")
    times_all = np.asarray(record.snapshot_times)
    lo, hi = (times_all[0], times_all[-1]) if window is None else window
    sel = np.nonzero((times_all >= lo - 1e-12) & (times_all <= hi + 1e-12))[0]
    if len(sel) < 2:
        raise ResolutionError("the monotonicity window holds fewer than two snapshots")
    times = times_all[sel]
    if spec.s - times[-1] < 4 * record.base_dt:
        raise ResolutionError(
            f"s - t = {spec.s - times[-1]:.3g} is below four steps (4 dt = {4 * record.base_dt:.3g})")

    dom = record.domain
    interior = spec.variant == "rho1"
    mass = np.empty(len(sel))
    xis = []
    for k, idx in enumerate(sel):
        pack = packs[idx] if packs is not None else MeasurePack(record.snapshot(int(idx)))
        wc = kernel_weight(spec, dom.centers, pack.time)
        m = float(np.sum(wc * pack.e * dom.volumes))
        if not interior:
            wb = kernel_weight(spec, dom.b_point, pack.time)
            m += float(np.sum(wb * pack.sigma_b * dom.b_weight))
        mass[k] = m
        xis.append(pack.xi)
    t_mid = 0.5 * (times[1:] + times[:-1])
    disc = np.empty(len(t_mid))
    for k, tm in enumerate(t_mid):
        wc = kernel_weight(spec, dom.centers, tm)
        xim = 0.5 * (xis[k] + xis[k + 1])
        disc[k] = float(np.sum(wc * xim * dom.volumes)) / (2 * (spec.s - tm))

    scale = max(1.0, float(np.max(np.abs(mass))) / max(float(np.min(np.diff(times))), 1e-300))
    tol = 1e-12 * scale

    def required_c2(c1):
        lhs, wm, rd = _sides(mass, times, t_mid, disc, spec.s, c1)
        return float(np.max((lhs - rd - tol) / wm))

    # user constants
    uc1 = 0.0 if interior else C1
    lhs_u, wm_u, rd_u = _sides(mass, times, t_mid, disc, spec.s, uc1)
    gap_u = lhs_u - (rd_u + wm_u * C2)
    user_viol = int(np.count_nonzero(gap_u > tol))

    c1_grid = np.array([0.0]) if interior else FIT_GRID
    fitted = None
    for c1 in c1_grid:
        req = required_c2(c1)
        ok = FIT_GRID[FIT_GRID >= req]
        if ok.size:
            fitted = (float(c1), float(ok[0]), req)
            break
    feasible = fitted is not None
    if not feasible:
        fitted = (float(c1_grid[-1]), float("inf"), required_c2(c1_grid[-1]))
    fc1, fc2, req = fitted
    lhs, wm, rd = _sides(mass, times, t_mid, disc, spec.s, fc1)
    rhs = rd + wm * fc2
    viol = int(np.count_nonzero(lhs - rhs > tol))
    return MonotonicityReport(
        variant=spec.variant, center=tuple(np.atleast_1d(spec.center).tolist()), s=spec.s,
        times=times, t_mid=t_mid, mass=mass, discrepancy_term=disc, C1=fc1, C2=fc2,
        lhs=lhs, rhs=rhs, violations=viol, user_constants=(uc1, C2), user_violations=user_viol,
        user_worst=float(np.max(gap_u)) if gap_u.size else 0.0, tolerance=tol, feasible=feasible,
        refinement_tag=refinement_tag, required_C2=req,
    )


# -- boundary energy budget --------------------------------------------------------------------

def boundary_energy_budget(record: RunRecord, T: float | None = None) -> tuple[float, float]:
    """Time integral over ``[0, T]`` of the boundary integral of ``eps|grad u|^2/2 + W/eps``.

    Uses the trapezoid rule on the per-step series recorded by the solver.
    Returns the value and ``C = value / (1 + T)``.
    """
    times = np.asarray(record.times)
    vals = np.asarray(record.boundary_density)
    if T is None:
        T = float(times[-1])
    if T > times[-1] + 1e-12:
        raise ParameterError(f"T = {T} exceeds the record horizon {times[-1]}")
    keep = times <= T + 1e-12
    t, v = times[keep], vals[keep]
    if t[-1] < T - 1e-12:
        v_end = np.interp(T, times, vals)
        t, v = np.append(t, T), np.append(v, v_end)
    value = float(np.trapezoid(v, t)) if len(t) > 1 else 0.0
    return value, value / (1.0 + T)


# -- contact angle ---------------------------------------------------------------------------------

@dataclass
class ContactAngle:
    """A contact point on one boundary component and its measured angle.

    ``angle`` is measured through the ``u < 0`` phase, in radians.
    """

    component: str
    position: float
    point: np.ndarray
    angle: float
    n_points: int
    samples: np.ndarray  # (m, 2): tangential offset towards the -1 phase, depth


def _crossings(values: np.ndarray, s: np.ndarray, period: float):
    """Zero crossings along a cyclic row; returns positions and orientation signs.

    Orientation ``+1`` means ``u`` increases with ``s`` through the crossing.
    """
    v0, v1 = values, np.roll(values, -1)
    s0 = s
    s1 = np.roll(s, -1)
    s1 = np.where(s1 < s0, s1 + period, s1)
    hit = (v0 < 0) & (v1 >= 0) | (v0 >= 0) & (v1 < 0)
    idx = np.nonzero(hit)[0]
    frac = v0[idx] / (v0[idx] - v1[idx])
    pos = np.mod(s0[idx] + frac * (s1[idx] - s0[idx]), period)
    orient = np.where(v1[idx] > v0[idx], 1, -1)
    return pos, orient


def _wrap(ds, period):
    return (ds + 0.5 * period) % period - 0.5 * period


def contact_angle_extract(
    fld: PhaseField,
    window: tuple[float, float] = (2.0, 10.0),
    fit: str = "quadratic",
    min_points: int = 5,
) -> list[ContactAngle]:
    """Contact angles of the zero level set with the boundary.

    Contact points are sign changes of the boundary-adjacent row of cells.
    From each, the level set is tracked inwards row by row (crossings located
    by linear interpolation along grid edges parallel to the boundary).
    Points at depth ``d`` in ``[window[0] eps, window[1] eps]`` (clipped to
    ``kappa``) are fitted in the local frame with the tangential offset as a
    polynomial in ``d`` (``"quadratic"`` by default, or ``"line"``), and the
    angle is that of the fitted curve at ``d = 0`` against the boundary,
    measured through the ``u < 0`` phase.

    Returns an empty list when the level set does not meet the boundary.

    Raises
    ------
    InsufficientResolutionError
        If a contact point has fewer than ``min_points`` fit points.
    """
    if fit not in ("quadratic", "line"):
        raise ParameterError("fit must be 'quadratic' or 'line'")
    dom = fld.domain
    eps = fld.epsilon
    u = fld.values
    d_lo = window[0] * eps
    d_hi = min(window[1] * eps, dom.kappa)
    results = []
    for comp in dom.collar_components():
        s = comp.tangential
        period = comp.period
        pos0, or0 = _crossings(u[comp.layers[0]], s, period)
        if len(comp.depths) > 1:
            jump = 10.0 * max(float(np.max(np.diff(comp.depths))), float(np.max(np.diff(s))))
        else:
            jump = float(np.max(np.diff(s)))
        for sc, oc in zip(pos0, or0):
            # Offsets are measured positive towards the u < 0 side.
            toward_neg = -oc
            prev = sc
            pts = []
            for depth, layer in zip(comp.depths, comp.layers):
                if depth > d_hi:
                    break
                pos, ori = _crossings(u[layer], s, period)
                same = ori == oc
                if not np.any(same):
                    break
                cand = pos[same]
                dist = np.abs(_wrap(cand - prev, period))
                k = int(np.argmin(dist))
                if dist[k] > jump:
                    break
                prev = cand[k]
                if depth >= d_lo:
                    pts.append((toward_neg * _wrap(cand[k] - sc, period), depth))
            pts = np.array(pts).reshape(-1, 2)
            if len(pts) < min_points:
                raise InsufficientResolutionError(
                    f"only {len(pts)} level-set points in the fit window "
                    f"[{d_lo:.3g}, {d_hi:.3g}] at contact s = {sc:.4g} on {comp.name}")
            deg = 2 if fit == "quadratic" else 1
            coef = np.polynomial.polynomial.polyfit(pts[:, 1], pts[:, 0], deg)
            slope = coef[1]
            angle = math.atan2(1.0, slope)
            point = comp.to_point(np.array(sc), np.array(0.0))
            results.append(ContactAngle(comp.name, float(sc), np.asarray(point), angle, len(pts), pts))
    return results


# -- traces and non-concentration ----------------------------------------------------------------

def trace_gap(fld: PhaseField, depth_factor: float = 4.0) -> float:
    """Normalised ``L^1`` distance between the boundary trace and the interior phase.

    Compares ``u_b`` with ``sign(u)`` sampled a collar width
    ``min(depth_factor * eps, kappa)`` inside along the inward normal.
    """
    dom = fld.domain
    depth = min(depth_factor * fld.epsilon, dom.kappa)
    ub = boundary_values(fld)
    inner = dom.b_point - depth * dom.b_normal
    vals = dom.interpolate(fld.values, inner)
    return float(np.sum(dom.b_weight * np.abs(ub - np.sign(vals))) / np.sum(dom.b_weight))


@dataclass
class NonconcentrationRow:
    time: float
    delta: float
    tubular_mass: float
    abs_discrepancy: float
    total_interior: float


def nonconcentration_profile(record: RunRecord, deltas: Sequence[float], times: Sequence[float] | None = None
                             ) -> list[NonconcentrationRow]:
    """Tubular mass and ``int |xi|`` at stored snapshots nearest to ``times``."""
    for d in deltas:
        if not (0.0 < d <= record.domain.kappa * (1 + 1e-14)):
            raise ParameterError(f"delta must lie in (0, kappa], got {d!r}")
    if times is None:
        idxs = range(len(record.snapshot_times))
    else:
        idxs = [record.snapshot_index_at(t) for t in times]
    rows = []
    for k in idxs:
        pack = MeasurePack(record.snapshot(k))
        ad = abs_discrepancy_integral(pack)
        tot = float(np.sum(pack.e * pack.domain.volumes))
        for d in deltas:
            rows.append(NonconcentrationRow(pack.time, float(d), tubular_mass(pack, d), ad, tot))
    return rows


def wetting_flag(rows: Sequence[NonconcentrationRow], fraction: float = 0.5) -> bool:
    """True when the thinnest collar holds more than ``fraction`` of the interior energy at the last time.

    A transversal contact puts a share of order ``delta / diameter`` of the
    interface energy in ``N_delta``; an interface spread along the boundary
    puts nearly all of it there.
    """
    if not rows:
        return False
    t_last = max(r.time for r in rows)
    last = [r for r in rows if r.time == t_last]
    thin = min(last, key=lambda r: r.delta)
    return thin.total_interior > 0 and thin.tubular_mass > fraction * thin.total_interior
