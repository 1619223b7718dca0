"""Double-well potential, boundary contact energy, and their derived constants.

An :class:`EnergyModel` bundles the bulk potential ``W`` and the wall energy
``sigma`` together with the numbers every other module needs: the surface
tension ``c0``, the convexity threshold ``gamma``, the Lipschitz constant
``c1`` of ``sigma`` against ``sqrt(2W)``, and the contact angle ``theta``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from .errors import ModelInvalidError, ParameterError

ScalarFn = Callable[[np.ndarray], np.ndarray]

SQRT2 = math.sqrt(2.0)
# Gauss-Legendre rule used for vectorised evaluation of the phase transform.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(96)
NEAR_WETTING_RATIO = 0.99


@dataclass(frozen=True, eq=False)
class EnergyModel:
    """The pair (W, sigma) and its derived constants.

    All callables accept scalars or numpy arrays.  ``sigma(-1) == 0`` is
    enforced at construction, which fixes the additive freedom in ``sigma``.
    """

    name: str
    W: ScalarFn
    Wp: ScalarFn
    Wpp: ScalarFn
    sigma: ScalarFn
    sigma_p: ScalarFn
    sigma_pp: ScalarFn
    gamma: float
    c0: float
    c1: float
    theta: float
    params: dict = field(default_factory=dict)
    phi_closed_form: ScalarFn | None = None
    heteroclinic_closed_form: ScalarFn | None = None

    def phi(self, s):
        return phi_transform(self, s)

    def max_abs_Wpp(self, bound: float = 1.1, samples: int = 4001) -> float:
        """Largest ``|W''|`` on ``[-bound, bound]`` (sampled, endpoints included)."""
        s = np.linspace(-bound, bound, samples)
        return float(np.max(np.abs(self.Wpp(s))))

    def describe(self) -> dict:
        return {"name": self.name, **self.params}


def _quartic_phi(s):
    s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    # factored so that Phi(-1) = 0 exactly
    return (s + 1.0) ** 2 * (2.0 - s) / (3.0 * SQRT2)


def _quartic_sigma_shape(s):
    # Antiderivative of sqrt(2W) = |1 - s^2|/sqrt(2), anchored at s = -1 and
    # continued outside [-1, 1] with the same integrand (C^1 across +-1).
    s = np.asarray(s, dtype=float)
    # factored forms keep sigma(-1) = 0 exact
    inside = (s + 1.0) ** 2 * (2.0 - s) / (3.0 * SQRT2)
    above = ((s - 1.0) ** 2 * (s + 2.0) + 4.0) / (3.0 * SQRT2)
    below = (s + 1.0) ** 2 * (s - 2.0) / (3.0 * SQRT2)
    return np.where(s > 1.0, above, np.where(s < -1.0, below, inside))


def _quartic_sqrt2W(s):
    s = np.asarray(s, dtype=float)
    return np.abs(1.0 - s**2) / SQRT2


def make_quartic_model(theta_target: float) -> EnergyModel:
    """Quartic well ``W = (1 - s^2)^2 / 4`` with ``sigma = cos(theta) * Phi``.

    Parameters
    ----------
    theta_target : float
        Prescribed contact angle in radians, in ``(0, pi/2]``.

    Returns
    -------
    EnergyModel
        Model whose ``c1`` equals ``cos(theta_target)`` and whose recovered
        contact angle is ``theta_target``.
    """
    theta_target = float(theta_target)
    if not (0.0 < theta_target <= math.pi / 2 + 1e-15):
        raise ParameterError(
            f"theta_target must lie in (0, pi/2], got {theta_target!r}"
        )
    cos_t = math.cos(theta_target)
    if abs(theta_target - math.pi / 2) < 1e-15:
        cos_t = 0.0

    def W(s):
        s = np.asarray(s, dtype=float)
        return 0.25 * (1.0 - s**2) ** 2

    def Wp(s):
        s = np.asarray(s, dtype=float)
        return s**3 - s

    def Wpp(s):
        s = np.asarray(s, dtype=float)
        return 3.0 * s**2 - 1.0

    def sigma(s):
        return cos_t * _quartic_sigma_shape(s)

    def sigma_p(s):
        return cos_t * _quartic_sqrt2W(s)

    def sigma_pp(s):
        s = np.asarray(s, dtype=float)
        return cos_t * (-SQRT2 * s) * np.sign(1.0 - s**2)

    def heteroclinic(z):
        return np.tanh(np.asarray(z, dtype=float) / SQRT2)

    c0 = 2.0 * SQRT2 / 3.0
    sigma1 = float(sigma(1.0))
    return EnergyModel(
        name="quartic",
        W=W,
        Wp=Wp,
        Wpp=Wpp,
        sigma=sigma,
        sigma_p=sigma_p,
        sigma_pp=sigma_pp,
        gamma=1.0 / math.sqrt(3.0),
        c0=c0,
        c1=abs(cos_t),
        theta=_angle_from_ratio(sigma1 / c0),
        params={"theta": theta_target},
        phi_closed_form=_quartic_phi,
        heteroclinic_closed_form=heteroclinic,
    )


def make_polynomial_model(
    W_coeffs, sigma_coeffs, name: str = "polynomial", margin: float = 0.5
) -> EnergyModel:
    """Model from ascending power-series coefficients of ``W`` and ``sigma``.

    ``sigma`` is shifted so that ``sigma(-1) = 0``.  ``c1`` is the tightest
    admissible constant found by :func:`validate_assumptions`; it may be
    ``inf`` when (A2)-type control fails, in which case the model still
    builds but the validation report flags it.
    """
    Wpoly = Polynomial(np.asarray(W_coeffs, dtype=float))
    spoly = Polynomial(np.asarray(sigma_coeffs, dtype=float))
    spoly = spoly - spoly(-1.0)
    dW, ddW = Wpoly.deriv(1), Wpoly.deriv(2)
    ds, dds = spoly.deriv(1), spoly.deriv(2)

    def _wrap(p):
        return lambda s: p(np.asarray(s, dtype=float))

    c0 = integrate.quad(
        lambda s: math.sqrt(max(2.0 * Wpoly(s), 0.0)), -1.0, 1.0,
        epsabs=1e-12, epsrel=1e-12, limit=200,
    )[0]
    if c0 <= 0:
        raise ModelInvalidError("c0 = int sqrt(2W) over [-1, 1] must be positive")

    roots = ddW.roots()
    real = roots[np.abs(roots.imag) < 1e-12].real
    inside = real[np.abs(real) < 1.0]
    gamma = float(np.max(np.abs(inside))) if inside.size else 0.0

    model = EnergyModel(
        name=name,
        W=_wrap(Wpoly),
        Wp=_wrap(dW),
        Wpp=_wrap(ddW),
        sigma=_wrap(spoly),
        sigma_p=_wrap(ds),
        sigma_pp=_wrap(dds),
        gamma=gamma,
        c0=c0,
        c1=float("nan"),
        theta=float("nan"),
        params={"W": list(map(float, W_coeffs)), "sigma": list(map(float, sigma_coeffs))},
    )
    c1 = _tightest_c1(model, np.linspace(-1.0 - margin, 1.0 + margin, 10_001))[0]
    ratio = float(model.sigma(1.0)) / c0
    theta = _angle_from_ratio(ratio) if abs(ratio) < 1.0 else float("nan")
    return EnergyModel(**{**model.__dict__, "c1": c1, "theta": theta})


def model_from_spec(spec: dict) -> EnergyModel:
    """Build a model from a config mapping (``{"name": "quartic", "theta": ...}``)."""
    name = spec.get("name", "quartic")
    if name == "quartic":
        return make_quartic_model(spec["theta"])
    if name == "polynomial":
        return make_polynomial_model(spec["W"], spec["sigma"])
    raise ParameterError(f"unknown model name {name!r}")


def phi_transform(model: EnergyModel, s):
    """``Phi(s) = int_{-1}^{s} sqrt(2 W)``, clamped to ``[-1, 1]`` outside.

    Closed form when the model registers one; otherwise a 96-point
    Gauss-Legendre rule on ``[-1, s]``, which is exact to rounding for the
    analytic integrands produced by double-well polynomials.
    """
    if model.phi_closed_form is not None:
        out = model.phi_closed_form(s)
        return float(out) if np.ndim(out) == 0 else out
    s_arr = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    half = 0.5 * (s_arr + 1.0)
    nodes = -1.0 + half[..., None] * (_GL_X + 1.0)
    vals = np.sqrt(np.maximum(2.0 * model.W(nodes), 0.0))
    out = half * np.sum(vals * _GL_W, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def _angle_from_ratio(ratio: float) -> float:
    return math.acos(max(-1.0, min(1.0, ratio)))


def contact_angle(model: EnergyModel) -> float:
    """Equilibrium angle ``arccos((sigma(1) - sigma(-1)) / c0)``.

    Raises
    ------
    ModelInvalidError
        If ``|sigma(1)| >= c0``; such a pair cannot satisfy (A2).
    """
    ratio = (float(model.sigma(1.0)) - float(model.sigma(-1.0))) / model.c0
    if abs(ratio) >= 1.0:
        raise ModelInvalidError(
            f"|sigma(1) - sigma(-1)| / c0 = {abs(ratio):.6g} >= 1; no contact angle exists"
        )
    if abs(ratio) >= NEAR_WETTING_RATIO:
        warnings.warn(
            f"near-wetting regime: sigma(1)/c0 = {ratio:.6g}", RuntimeWarning, stacklevel=2
        )
    return math.acos(ratio)


@dataclass
class ClauseResult:
    name: str
    passed: bool
    worst_s: float | None
    detail: str


@dataclass
class AssumptionReport:
    clauses: list[ClauseResult]
    gamma: float
    c1: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, name: str) -> ClauseResult:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)


def _tightest_c1(model: EnergyModel, s: np.ndarray) -> tuple[float, float]:
    """``sup |sigma'| / sqrt(2W)`` over ``s``; limit values at the wells."""
    W = model.W(s)
    sp = np.abs(model.sigma_p(s))
    root = np.sqrt(np.maximum(2.0 * W, 0.0))
    scale = max(1.0, float(np.max(sp)))
    worst_val, worst_s = 0.0, float(s[0])
    # Away from the wells the ratio is evaluated directly.
    ok = root > 1e-6
    if np.any(ok):
        r = sp[ok] / root[ok]
        k = int(np.argmax(r))
        worst_val, worst_s = float(r[k]), float(s[ok][k])
    for well in (-1.0, 1.0):
        if abs(float(model.sigma_p(well))) > 1e-12 * scale:
            return float("inf"), well
        wpp = float(model.Wpp(well))
        if wpp <= 0:
            return float("inf"), well
        lim = abs(float(model.sigma_pp(well))) / math.sqrt(wpp)
        if lim > worst_val:
            worst_val, worst_s = lim, well
    return worst_val, worst_s


def validate_assumptions(model: EnergyModel, sample_count: int = 10_000) -> AssumptionReport:
    """Check (A1)-(A2) by dense sampling on ``[-1.5, 1.5]``.

    Parameters
    ----------
    model : EnergyModel
    sample_count : int
        Number of sample points, at least 1000.

    Returns
    -------
    AssumptionReport
        One clause per condition with the worst offending ``s``; ``c1`` is
        the tightest admissible constant (``inf`` if none exists).
    """
    if sample_count < 1000:
        raise ParameterError("sample_count must be >= 1000")
    s = np.linspace(-1.5, 1.5, sample_count)
    s = np.union1d(s, [-1.0, 0.0, 1.0])
    clauses = []

    W = model.W(s)
    k = int(np.argmin(W))
    clauses.append(ClauseResult("W_nonnegative", bool(W[k] >= -1e-14), float(s[k]), f"min W = {W[k]:.3e}"))

    w_wells = [float(model.W(-1.0)), float(model.W(1.0))]
    clauses.append(ClauseResult(
        "W_zero_at_wells", max(map(abs, w_wells)) <= 1e-14, None, f"W(-1), W(1) = {w_wells}"))

    wpp_wells = [float(model.Wpp(-1.0)), float(model.Wpp(1.0))]
    clauses.append(ClauseResult(
        "W_nondegenerate_wells", min(wpp_wells) > 0, None, f"W''(-1), W''(1) = {wpp_wells}"))

    inner = s[(s > -1.0) & (s < 1.0)]
    Wp_in = model.Wp(inner)
    sign_changes = np.count_nonzero(np.diff(np.sign(Wp_in[np.abs(Wp_in) > 1e-15])) != 0)
    clauses.append(ClauseResult(
        "W_unique_interior_max", sign_changes == 1 and bool(np.all(model.W(inner) > 0)), None,
        f"{sign_changes} sign change(s) of W' in (-1, 1)"))

    outside = s[np.abs(s) > model.gamma + 1e-12]
    Wpp_out = model.Wpp(outside)
    k = int(np.argmin(Wpp_out)) if outside.size else 0
    convex_ok = bool(outside.size == 0 or Wpp_out[k] > 0) and 0.0 < model.gamma < 1.0
    clauses.append(ClauseResult(
        "W_convex_outside_gamma", convex_ok, float(outside[k]) if outside.size else None,
        f"gamma = {model.gamma:.6g}"))

    c1, worst = _tightest_c1(model, s)
    clauses.append(ClauseResult(
        "sigma_lipschitz_c1_lt_1", bool(c1 < 1.0), worst, f"tightest c1 = {c1:.12g}"))

    sigma1 = float(model.sigma(1.0))
    clauses.append(ClauseResult(
        "sigma_one_below_c0", abs(sigma1) < model.c0, 1.0, f"|sigma(1)| = {abs(sigma1):.6g}, c0 = {model.c0:.6g}"))

    return AssumptionReport(clauses=clauses, gamma=model.gamma, c1=c1)


def heteroclinic_profile(model: EnergyModel) -> ScalarFn:
    """The 1D optimal profile ``q`` with ``q' = sqrt(2 W(q))`` and ``q(0) = 0``.

    Closed form for the quartic model; otherwise tabulated from the inverse
    map ``z(q) = int_0^q ds / sqrt(2 W(s))`` and interpolated.
    """
    if model.heteroclinic_closed_form is not None:
        return model.heteroclinic_closed_form
    # W(0) need not be the maximum, but q(0) = 0 is just a centring choice.
    qs = np.linspace(-1.0 + 1e-9, 1.0 - 1e-9, 20_001)
    inv = 1.0 / np.sqrt(np.maximum(2.0 * model.W(qs), 1e-300))
    zs = integrate.cumulative_trapezoid(inv, qs, initial=0.0)
    z0 = np.interp(0.0, qs, zs)
    zs = zs - z0

    def q(z):
        return np.interp(np.asarray(z, dtype=float), zs, qs, left=-1.0, right=1.0)

    return q


def convexity_threshold(model: EnergyModel) -> float:
    """Numerically locate the largest ``|s| < 1`` with ``W''(s) = 0``."""
    s = np.linspace(0.0, 1.0, 4001)
    f = model.Wpp(s)
    best = 0.0
    for i in range(len(s) - 1):
        if f[i] == 0.0:
            best = max(best, s[i])
        elif f[i] * f[i + 1] < 0:
            best = max(best, optimize.brentq(lambda x: float(model.Wpp(x)), s[i], s[i + 1]))
    s = -s
    f = model.Wpp(s)
    for i in range(len(s) - 1):
        if f[i] * f[i + 1] < 0:
            best = max(best, -optimize.brentq(lambda x: float(model.Wpp(x)), s[i + 1], s[i]))
    return best
