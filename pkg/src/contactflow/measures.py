"""Energy measures, discrepancy, diffuse varifolds and first variations of a snapshot.

All functionals are cell-centred quadratures over the finite-volume grid
plus boundary-face quadratures.  The interior energy density is built from
face differences, so that ``interior_measure(pack, 1)`` equals the solver's
interior energy up to rounding:

    e  = eps * g2 / 2 + W(u) / eps,
    xi = eps * g2 / 2 - W(u) / eps,

where ``g2`` is the cell average of squared face gradients.  The unit
normal ``a = grad u / |grad u|`` uses the centred vector gradient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .energetics import phi_transform
from .errors import ParameterError
from .fields import ScalarTestFunction, VectorField
from .geometry import Channel2D, Disk2D, DomainGeometry, Interval1D
from .solver import PhaseField, RunRecord, boundary_density, boundary_gradient, boundary_values, pde_rhs

GRAD_THRESHOLD_REL = 1e-12
# stencil rounding level, in units of max|u| / h
GRAD_ROUNDOFF = 64 * np.finfo(float).eps


class MeasurePack:
    """Cached densities of one snapshot.

    Attributes are computed lazily: ``e``, ``xi``, ``grad``, ``direction``,
    ``active`` (cells with ``|grad u| > tau``), ``ub`` and the boundary
    gradient ``grad_b`` (normal part from the boundary condition, tangential
    part from centred differences along the boundary).
    """

    def __init__(self, field: PhaseField):
        self.field = field
        self.domain = field.domain
        self.model = field.model
        self.epsilon = field.epsilon
        self.u = field.values
        self.time = field.time

    @cached_property
    def g2(self) -> np.ndarray:
        return self.domain.face_gradient_sq(self.u)

    @cached_property
    def potential(self) -> np.ndarray:
        return self.model.W(self.u) / self.epsilon

    @cached_property
    def e(self) -> np.ndarray:
        return 0.5 * self.epsilon * self.g2 + self.potential

    @cached_property
    def xi(self) -> np.ndarray:
        return 0.5 * self.epsilon * self.g2 - self.potential

    @cached_property
    def grad(self) -> np.ndarray:
        return self.domain.cell_gradient(self.u)

    @cached_property
    def grad_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.grad**2, axis=1))

    @cached_property
    def tau(self) -> float:
        """Threshold for ``grad u != 0``: relative to the largest gradient, floored
        at the rounding level of the difference stencils."""
        if not self.grad_norm.size:
            return 0.0
        floor = GRAD_ROUNDOFF * float(np.max(np.abs(self.u))) / self.domain.spacing
        return max(GRAD_THRESHOLD_REL * float(np.max(self.grad_norm)), floor)

    @cached_property
    def active(self) -> np.ndarray:
        return self.grad_norm > self.tau

    @cached_property
    def direction(self) -> np.ndarray:
        a = np.zeros_like(self.grad)
        m = self.active
        a[m] = self.grad[m] / self.grad_norm[m, None]
        return a

    @cached_property
    def ub(self) -> np.ndarray:
        return boundary_values(self.field)

    @cached_property
    def sigma_b(self) -> np.ndarray:
        return self.model.sigma(self.ub)

    @cached_property
    def grad_b(self) -> np.ndarray:
        return boundary_gradient(self.field)

    @cached_property
    def boundary_density(self) -> np.ndarray:
        """``eps |grad u|^2 / 2 + W(u) / eps`` at boundary nodes."""
        return boundary_density(self.field)

    @cached_property
    def eps_ut(self) -> np.ndarray:
        """``eps du/dt`` from the discrete equation."""
        return pde_rhs(self.field)


def _phi_values(phi, x: np.ndarray) -> np.ndarray:
    if phi is None:
        return np.ones(len(x))
    if isinstance(phi, ScalarTestFunction):
        return phi.value(x)
    if callable(phi):
        return np.asarray(phi(x), dtype=float) * np.ones(len(x))
    return np.full(len(x), float(phi))


def interior_measure(pack: MeasurePack, phi=None) -> float:
    """``sum phi * e * |K|``; ``phi`` may be a test function, callable or constant."""
    dom = pack.domain
    return float(np.sum(_phi_values(phi, dom.centers) * pack.e * dom.volumes))


def boundary_measure(pack: MeasurePack, phi=None) -> float:
    """``sum_b phi * sigma(u_b) * w_b``."""
    dom = pack.domain
    return float(np.sum(_phi_values(phi, dom.b_point) * pack.sigma_b * dom.b_weight))


def total_measure(pack: MeasurePack, phi=None) -> float:
    return interior_measure(pack, phi) + boundary_measure(pack, phi)


def discrepancy_integral(pack: MeasurePack) -> float:
    return float(np.sum(pack.xi * pack.domain.volumes))


def abs_discrepancy_integral(pack: MeasurePack) -> float:
    return float(np.sum(np.abs(pack.xi) * pack.domain.volumes))


def tubular_mass(pack: MeasurePack, delta: float) -> float:
    """Interior energy inside the collar ``N_delta``."""
    mask = pack.domain.tubular_mass_region(delta)
    return float(np.sum((pack.e * pack.domain.volumes)[mask]))


def varifold_action(pack: MeasurePack, integrand: Callable, total: bool = False) -> float:
    """Action of the diffuse varifold on ``integrand(x, S)``.

    ``integrand`` receives points ``(N, dim)`` and projection matrices
    ``(N, dim, dim)`` and returns ``(N,)``.  The interior part integrates over
    cells with ``|grad u| > tau`` against ``e``; with ``total=True`` the
    boundary part with ``S = I - nu nu`` against ``sigma(u_b)`` is added.
    """
    dom = pack.domain
    m = pack.active
    a = pack.direction[m]
    S = np.eye(dom.dim) - np.einsum("ni,nj->nij", a, a)
    val = float(np.sum(integrand(dom.centers[m], S) * (pack.e * dom.volumes)[m]))
    if total:
        nu = dom.b_normal
        Sb = np.eye(dom.dim) - np.einsum("ni,nj->nij", nu, nu)
        val += float(np.sum(integrand(dom.b_point, Sb) * pack.sigma_b * dom.b_weight))
    return val


def first_variation_direct(pack: MeasurePack, g: VectorField) -> float:
    """``delta V(g) = int grad g : S dV`` for the total diffuse varifold."""
    dom = pack.domain
    m = pack.active
    J = g.jacobian(dom.centers[m])
    a = pack.direction[m]
    contr = np.trace(J, axis1=1, axis2=2) - np.einsum("nij,ni,nj->n", J, a, a)
    interior = float(np.sum(contr * (pack.e * dom.volumes)[m]))
    Jb = g.jacobian(dom.b_point)
    nu = dom.b_normal
    contr_b = np.trace(Jb, axis1=1, axis2=2) - np.einsum("nij,ni,nj->n", Jb, nu, nu)
    boundary = float(np.sum(contr_b * pack.sigma_b * dom.b_weight))
    return interior + boundary


def first_variation_terms(pack: MeasurePack, g: VectorField) -> dict:
    """The four terms of the first-variation identity for solutions.

    ``eps du/dt`` is replaced by the discrete right-hand side
    ``eps Lap u - W'(u)/eps`` with the boundary flux.  For tangential ``g``
    the boundary term is dropped.
    """
    dom = pack.domain
    vol = dom.volumes
    m = pack.active
    J = g.jacobian(dom.centers)
    a = pack.direction
    aa = np.einsum("nij,ni,nj->n", J[m], a[m], a[m])
    t1 = float(np.sum(aa * (pack.xi * vol)[m]))
    trJ = np.trace(J, axis1=1, axis2=2)
    t2 = float(np.sum((trJ * pack.xi * vol)[~m]))
    gv = g.value(dom.centers)
    t3 = float(np.sum(pack.eps_ut * np.sum(gv * pack.grad, axis=1) * vol))
    if g.tangential:
        t4 = 0.0
    else:
        gn = np.sum(g.value(dom.b_point) * dom.b_normal, axis=1)
        dens = pack.boundary_density - pack.model.sigma_p(pack.ub) ** 2 / pack.epsilon
        t4 = float(np.sum(dens * gn * dom.b_weight))
    return {"projected_discrepancy": t1, "flat_discrepancy": t2, "velocity": t3, "boundary": t4}


def first_variation_formula(pack: MeasurePack, g: VectorField) -> float:
    return float(sum(first_variation_terms(pack, g).values()))


def first_variation_norm_estimate(pack: MeasurePack, fields: Sequence[VectorField]) -> tuple[float, str]:
    """Lower bound ``max_g |delta V(g)| / sup|g|`` and the maximising field name."""
    if len(fields) < 10:
        raise ParameterError("the dictionary must contain at least 10 vector fields")
    best, name = -1.0, ""
    for g in fields:
        v = abs(first_variation_direct(pack, g)) / g.sup_norm
        if v > best:
            best, name = v, g.name
    return best, name


def phase_total_variation(pack: MeasurePack) -> float:
    """``sum |grad w| |K|`` for ``w = Phi(u)``, using the face-based gradient magnitude."""
    w = phi_transform(pack.model, pack.u)
    g2w = pack.domain.face_gradient_sq(np.asarray(w, float))
    return float(np.sum(np.sqrt(g2w) * pack.domain.volumes))


def spacetime_measure(record: RunRecord, phi: Callable | None = None) -> float:
    """Time trapezoid of ``mu_t(phi(., t))`` over stored snapshots.

    ``phi(x, t)`` returns values at points ``x``; ``None`` means ``phi = 1``.
    """
    vals, times = [], []
    for fld in record.snapshots():
        pack = MeasurePack(fld)
        if phi is None:
            v = total_measure(pack)
        else:
            f = lambda x, t=fld.time: phi(x, t)  # noqa: E731
            v = total_measure(pack, f)
        vals.append(v)
        times.append(fld.time)
    if len(vals) < 2:
        return 0.0
    return float(np.trapezoid(vals, times))


@dataclass
class SemidecreasingReport:
    names: list
    times: np.ndarray
    values: np.ndarray  # (n_functions, n_times) of mu_t(phi)
    slack: np.ndarray  # allowed increase minus actual increase, per interval
    tolerance: float

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.slack < -self.tolerance))

    @property
    def worst(self) -> float:
        return float(-np.min(self.slack)) if self.slack.size else 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0


def semidecreasing_check(record: RunRecord, functions: Sequence[ScalarTestFunction],
                         E0: float | None = None, rel_tol: float = 1e-6) -> SemidecreasingReport:
    """Check ``mu_{t2}(phi) - mu_{t1}(phi) <= E0 ||phi||_{C^2} (t2 - t1)`` on adjacent snapshots."""
    E0 = record.E0 if E0 is None else E0
    packs = [MeasurePack(f) for f in record.snapshots()]
    times = np.array([p.time for p in packs])
    values = np.array([[total_measure(p, phi) for p in packs] for phi in functions])
    bounds = np.array([phi.c2_bound for phi in functions])[:, None]
    dt = np.diff(times)[None, :]
    slack = E0 * bounds * dt - np.diff(values, axis=1)
    return SemidecreasingReport([f.name for f in functions], times, values, slack, rel_tol * E0)


# -- dictionaries ------------------------------------------------------------------

def _gaussian(name: str, center, width: float) -> ScalarTestFunction:
    c = np.asarray(center, float)
    s2 = width * width

    def value(x):
        d = np.asarray(x, float) - c
        return np.exp(-np.sum(d * d, axis=-1) / (2 * s2))

    def gradient(x):
        d = np.asarray(x, float) - c
        return -(d / s2) * value(x)[..., None]

    def hessian(x):
        d = np.asarray(x, float) - c
        v = value(x)[..., None, None]
        eye = np.eye(c.size)
        return v * (np.einsum("...i,...j->...ij", d, d) / s2**2 - eye / s2)

    # sup|phi| = 1, sup|grad| = 1/(w sqrt e), sup||hess|| = 1/w^2
    bound = max(1.0, 1.0 / (width * math.sqrt(math.e)), 1.0 / s2)
    return ScalarTestFunction(name, value, gradient, hessian, bound)


def _periodic_bump(name: str, Lx: float, cx: float, k: float, cy: float, width: float) -> ScalarTestFunction:
    """``exp(k (cos(2 pi (x - cx)/Lx) - 1)) * exp(-(y - cy)^2 / (2 w^2))``."""
    om = 2 * math.pi / Lx
    s2 = width * width

    def parts(x):
        x = np.asarray(x, float)
        z = om * (x[..., 0] - cx)
        f = np.exp(k * (np.cos(z) - 1.0))
        fp = -k * om * np.sin(z) * f
        fpp = om * om * f * (k * k * np.sin(z) ** 2 - k * np.cos(z))
        dy = x[..., 1] - cy
        g = np.exp(-dy * dy / (2 * s2))
        gp = -dy / s2 * g
        gpp = (dy * dy / s2**2 - 1 / s2) * g
        return f, fp, fpp, g, gp, gpp

    def value(x):
        f, _, _, g, _, _ = parts(x)
        return f * g

    def gradient(x):
        f, fp, _, g, gp, _ = parts(x)
        return np.stack([fp * g, f * gp], axis=-1)

    def hessian(x):
        f, fp, fpp, g, gp, gpp = parts(x)
        H = np.empty(np.shape(f) + (2, 2))
        H[..., 0, 0] = fpp * g
        H[..., 0, 1] = H[..., 1, 0] = fp * gp
        H[..., 1, 1] = f * gpp
        return H

    sf, sfp, sfpp = 1.0, k * om, om * om * (k * k + k)
    sg, sgp, sgpp = 1.0, 1.0 / (width * math.sqrt(math.e)), 1.0 / s2
    grad_b = math.hypot(sfp * sg, sf * sgp)
    hess_b = max(sfpp * sg + sfp * sgp, sf * sgpp + sfp * sgp)
    return ScalarTestFunction(name, value, gradient, hessian, max(1.0, grad_b, hess_b))


def _constant_one() -> ScalarTestFunction:
    return ScalarTestFunction(
        "one",
        lambda x: np.ones(np.shape(x)[:-1]),
        lambda x: np.zeros(np.shape(x)),
        lambda x: np.zeros(np.shape(x) + (np.shape(x)[-1],)),
        1.0,
    )


def default_test_functions(domain: DomainGeometry) -> list[ScalarTestFunction]:
    """Five non-negative C^2 test functions adapted to the domain."""
    if isinstance(domain, Channel2D):
        Lx, Ly = domain.Lx, domain.Ly
        return [
            _constant_one(),
            _periodic_bump("bump_wall", Lx, 0.25 * Lx, 2.0, 0.0, 0.15 * Ly / 0.5),
            _periodic_bump("bump_center", Lx, 0.5 * Lx, 2.0, 0.5 * Ly, 0.2 * Ly / 0.5),
            _periodic_bump("bump_top", Lx, 0.75 * Lx, 1.0, Ly, 0.25 * Ly / 0.5),
            _periodic_bump("band_lower", Lx, 0.0, 0.0, 0.25 * Ly, 0.3 * Ly / 0.5),
        ]
    if isinstance(domain, Disk2D):
        R = domain.R
        return [
            _constant_one(),
            _gaussian("gauss_center", (0.0, 0.0), 0.4 * R),
            _gaussian("gauss_rim_east", (R, 0.0), 0.3 * R),
            _gaussian("gauss_rim_north", (0.0, R), 0.5 * R),
            _gaussian("gauss_inner", (0.3 * R, -0.3 * R), 0.25 * R),
        ]
    if isinstance(domain, Interval1D):
        a, b = domain.a, domain.b
        L = b - a
        return [
            _constant_one(),
            _gaussian("gauss_left", (a,), 0.2 * L),
            _gaussian("gauss_mid", (a + 0.5 * L,), 0.15 * L),
            _gaussian("gauss_right", (b,), 0.3 * L),
            _gaussian("gauss_quarter", (a + 0.25 * L,), 0.1 * L),
        ]
    raise ParameterError(f"no default dictionary for {domain.kind}")


def _field(name, value, jacobian, tangential, sup_norm=1.0):
    return VectorField(name, value, jacobian, tangential=tangential, sup_norm=sup_norm)


def _channel_fields(dom: Channel2D) -> list[VectorField]:
    Lx, Ly = dom.Lx, dom.Ly
    kx, ky = 2 * math.pi / Lx, math.pi / Ly
    out = []

    def sx(x):
        return np.sin(kx * x[..., 0])

    def cx(x):
        return np.cos(kx * x[..., 0])

    def zeros(x):
        return np.zeros(np.shape(x)[:-1])

    def vec(gx, gy):
        return lambda x: np.stack([gx(x), gy(x)], axis=-1)

    def jac(a, b, c, d):
        def J(x):
            M = np.empty(np.shape(x)[:-1] + (2, 2))
            M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1] = a(x), b(x), c(x), d(x)
            return M
        return J

    # Tangential fields: g_y vanishes on both walls.
    out.append(_field("shear_sin", vec(lambda x: sx(x) * np.cos(ky * x[..., 1]), zeros),
                      jac(lambda x: kx * cx(x) * np.cos(ky * x[..., 1]),
                          lambda x: -ky * sx(x) * np.sin(ky * x[..., 1]), zeros, zeros), True))
    out.append(_field("slide_x", vec(lambda x: np.cos(ky * x[..., 1]) ** 2, zeros),
                      jac(zeros, lambda x: -ky * np.sin(2 * ky * x[..., 1]), zeros, zeros), True))
    out.append(_field("squeeze_y", vec(zeros, lambda x: cx(x) * np.sin(ky * x[..., 1])),
                      jac(zeros, zeros, lambda x: -kx * sx(x) * np.sin(ky * x[..., 1]),
                          lambda x: ky * cx(x) * np.cos(ky * x[..., 1])), True))
    out.append(_field("mixed", vec(cx, lambda x: sx(x) * np.sin(ky * x[..., 1])),
                      jac(lambda x: -kx * sx(x), zeros,
                          lambda x: kx * cx(x) * np.sin(ky * x[..., 1]),
                          lambda x: ky * sx(x) * np.cos(ky * x[..., 1])), True))
    out.append(_field("stretch_x", vec(sx, zeros), jac(lambda x: kx * cx(x), zeros, zeros, zeros), True))
    # Fields crossing the walls.
    out.append(_field("lift_y", vec(zeros, lambda x: np.cos(ky * x[..., 1])),
                      jac(zeros, zeros, zeros, lambda x: -ky * np.sin(ky * x[..., 1])), False))
    out.append(_field("lift_wavy", vec(zeros, lambda x: cx(x) * np.cos(ky * x[..., 1])),
                      jac(zeros, zeros, lambda x: -kx * sx(x) * np.cos(ky * x[..., 1]),
                          lambda x: -ky * cx(x) * np.sin(ky * x[..., 1])), False))
    out.append(_field("tilt", vec(lambda x: 0.5 * cx(x), lambda x: 0.5 * sx(x) * np.cos(ky * x[..., 1])),
                      jac(lambda x: -0.5 * kx * sx(x), zeros,
                          lambda x: 0.5 * kx * cx(x) * np.cos(ky * x[..., 1]),
                          lambda x: -0.5 * ky * sx(x) * np.sin(ky * x[..., 1])), False, sup_norm=0.5))
    out.append(_field("expand_y", vec(zeros, lambda x: 2 * x[..., 1] / Ly - 1.0),
                      jac(zeros, zeros, zeros, lambda x: np.full(np.shape(x)[:-1], 2 / Ly)), False))
    out.append(dom.normal_extension_field(0.5 * dom.kappa))
    return out


def _disk_fields(dom: Disk2D) -> list[VectorField]:
    R = dom.R
    out = []

    def make(name, value, jacobian, tangential):
        out.append(_field(name, value, jacobian, tangential))

    def rot(x):
        x = np.asarray(x, float)
        return np.stack([-x[..., 1], x[..., 0]], axis=-1) / R

    def rot_J(x):
        M = np.zeros(np.shape(x)[:-1] + (2, 2))
        M[..., 0, 1], M[..., 1, 0] = -1 / R, 1 / R
        return M

    make("rotation", rot, rot_J, True)

    def dil(x):
        return np.asarray(x, float) / R

    def dil_J(x):
        return np.broadcast_to(np.eye(2) / R, np.shape(x)[:-1] + (2, 2)).copy()

    make("dilation", dil, dil_J, False)

    for ax, name in ((0, "translate_x"), (1, "translate_y")):
        e = np.eye(2)[ax]
        make(name, lambda x, e=e: np.broadcast_to(e, np.shape(x)).copy(),
             lambda x: np.zeros(np.shape(x)[:-1] + (2, 2)), False)

    def swirl(x):
        x = np.asarray(x, float)
        r2 = np.sum(x * x, axis=-1) / R**2
        return (1 - r2)[..., None] * np.stack([-x[..., 1], x[..., 0]], axis=-1) / R

    def swirl_J(x):
        x = np.asarray(x, float)
        r2 = np.sum(x * x, axis=-1) / R**2
        J = (1 - r2)[..., None, None] * rot_J(x)
        rv = np.stack([-x[..., 1], x[..., 0]], axis=-1) / R
        return J - np.einsum("...i,...j->...ij", rv, 2 * x / R**2)

    out.append(_field("swirl", swirl, swirl_J, True, sup_norm=2 / (3 * math.sqrt(3))))

    def quad(x):
        x = np.asarray(x, float) / R
        return np.stack([x[..., 0] ** 2 - x[..., 1] ** 2, 2 * x[..., 0] * x[..., 1]], axis=-1) * 0.5

    def quad_J(x):
        x = np.asarray(x, float) / R
        M = np.empty(np.shape(x)[:-1] + (2, 2))
        M[..., 0, 0], M[..., 0, 1] = x[..., 0], -x[..., 1]
        M[..., 1, 0], M[..., 1, 1] = x[..., 1], x[..., 0]
        return M / R

    out.append(_field("conformal_quadratic", quad, quad_J, False, sup_norm=0.5))

    def shear(x):
        x = np.asarray(x, float) / R
        return np.stack([x[..., 1], np.zeros_like(x[..., 0])], axis=-1)

    def shear_J(x):
        M = np.zeros(np.shape(x)[:-1] + (2, 2))
        M[..., 0, 1] = 1 / R
        return M

    out.append(_field("shear", shear, shear_J, False))

    def rot_mode(x):
        x = np.asarray(x, float)
        amp = (x[..., 0] ** 2 - x[..., 1] ** 2) / R**2
        return amp[..., None] * np.stack([-x[..., 1], x[..., 0]], axis=-1) / R

    def rot_mode_J(x):
        x = np.asarray(x, float)
        amp = (x[..., 0] ** 2 - x[..., 1] ** 2) / R**2
        damp = np.stack([2 * x[..., 0], -2 * x[..., 1]], axis=-1) / R**2
        rv = np.stack([-x[..., 1], x[..., 0]], axis=-1) / R
        return amp[..., None, None] * rot_J(x) + np.einsum("...i,...j->...ij", rv, damp)

    out.append(_field("rotation_mode2", rot_mode, rot_mode_J, True))

    def radial_mode(x):
        x = np.asarray(x, float)
        amp = 2 * x[..., 0] * x[..., 1] / R**2
        return amp[..., None] * x / R

    def radial_mode_J(x):
        x = np.asarray(x, float)
        amp = 2 * x[..., 0] * x[..., 1] / R**2
        damp = np.stack([2 * x[..., 1], 2 * x[..., 0]], axis=-1) / R**2
        return amp[..., None, None] * np.eye(2) / R + np.einsum("...i,...j->...ij", x / R, damp)

    out.append(_field("radial_mode2", radial_mode, radial_mode_J, False))
    out.append(dom.normal_extension_field(0.5 * dom.kappa))
    return out


def _interval_fields(dom: Interval1D) -> list[VectorField]:
    a, b = dom.a, dom.b
    L = b - a
    out = []
    for k in range(1, 6):
        w = k * math.pi / L
        out.append(_field(f"sine_{k}", lambda x, w=w: np.sin(w * (np.asarray(x, float) - a)),
                          lambda x, w=w: (w * np.cos(w * (np.asarray(x, float)[..., 0] - a)))[..., None, None],
                          True))
    for k in range(0, 4):
        w = k * math.pi / L
        out.append(_field(f"cosine_{k}", lambda x, w=w: np.cos(w * (np.asarray(x, float) - a)),
                          lambda x, w=w: (-w * np.sin(w * (np.asarray(x, float)[..., 0] - a)))[..., None, None],
                          False))
    out.append(dom.normal_extension_field(0.5 * dom.kappa))
    return out


def default_vector_fields(domain: DomainGeometry) -> list[VectorField]:
    """Ten or more vector fields of unit sup-norm with analytic Jacobians.

    Tangency flags are verified at every boundary node.
    """
    if isinstance(domain, Channel2D):
        fields = _channel_fields(domain)
    elif isinstance(domain, Disk2D):
        fields = _disk_fields(domain)
    elif isinstance(domain, Interval1D):
        fields = _interval_fields(domain)
    else:
        raise ParameterError(f"no default dictionary for {domain.kind}")
    for g in fields:
        verify_tangency(domain, g)
    return fields


def verify_tangency(domain: DomainGeometry, g: VectorField, tol: float = 1e-12) -> float:
    """Max ``|g . nu|`` over boundary nodes; raises if a tangential flag is wrong."""
    gn = float(np.max(np.abs(np.sum(g.value(domain.b_point) * domain.b_normal, axis=1))))
    if g.tangential and gn > tol:
        raise ParameterError(f"field {g.name!r} is flagged tangential but |g.nu| = {gn:.3e}")
    return gn
