"""Domains with smooth boundary, their finite-volume grids, and collar geometry.

Three kinds are available: :class:`Interval1D`, :class:`Channel2D` (periodic
in x, walls at y = 0 and y = Ly) and :class:`Disk2D` (polar grid).  Each
instance carries

* cell centres and volumes,
* internal faces as ``(i, j, transmissibility)`` triples, where the
  transmissibility is face length over centre distance,
* boundary faces with quadrature weight, outward normal, foot point,
  centre-to-face distance and mean-curvature vector,

together with the exact nearest-point projection, reflection across the
boundary, and helpers for the one-sided collar ``N_r``.  Instances are
immutable after construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import CollarError, DomainError, ParameterError
from .fields import VectorField

_TOL = 1e-12


@dataclass(frozen=True)
class CollarComponent:
    """One connected boundary component seen from the inside.

    ``layers[k]`` lists the cells at distance ``depths[k]`` from the boundary,
    in the same cyclic tangential order as ``tangential``.  Tangential
    coordinates are arc length measured on the boundary itself.
    """

    name: str
    period: float
    tangential: np.ndarray
    depths: np.ndarray
    layers: tuple
    domain: "DomainGeometry"

    def to_point(self, s: np.ndarray, d: np.ndarray) -> np.ndarray:
        return self.domain._collar_to_point(self.name, np.asarray(s, float), np.asarray(d, float))

    def frame(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        """Unit tangent (direction of increasing ``s``) and outward normal at ``s``."""
        return self.domain._collar_frame(self.name, float(s))


class DomainGeometry:
    """Common interface of the three domain kinds."""

    kind: str
    dim: int
    shape: tuple
    kappa: float
    exact_volume: float
    exact_boundary_measure: float
    spacing: float

    centers: np.ndarray
    volumes: np.ndarray
    face_i: np.ndarray
    face_j: np.ndarray
    face_trans: np.ndarray
    b_cell: np.ndarray
    b_weight: np.ndarray
    b_point: np.ndarray
    b_normal: np.ndarray
    b_dist: np.ndarray
    b_curvature: np.ndarray

    # -- construction helpers -------------------------------------------------

    def _freeze(self) -> None:
        for name in (
            "centers", "volumes", "face_i", "face_j", "face_trans", "b_cell",
            "b_weight", "b_point", "b_normal", "b_dist", "b_curvature",
        ):
            getattr(self, name).setflags(write=False)

    @property
    def n_cells(self) -> int:
        return int(self.volumes.size)

    @property
    def n_boundary(self) -> int:
        return int(self.b_weight.size)

    def describe(self) -> dict:
        raise NotImplementedError

    # -- sparse operators -----------------------------------------------------

    @cached_property
    def stiffness(self) -> sp.csc_matrix:
        """Graph Laplacian ``L`` with ``(L u)_i = sum_f T_f (u_i - u_j)``."""
        n = self.n_cells
        i, j, T = self.face_i, self.face_j, self.face_trans
        rows = np.concatenate([i, j, i, j])
        cols = np.concatenate([i, j, j, i])
        vals = np.concatenate([T, T, -T, -T])
        return sp.csc_matrix((vals, (rows, cols)), shape=(n, n))

    @cached_property
    def cell_gradient_ops(self) -> tuple:
        """Sparse matrices whose products with ``u`` give Cartesian gradient components."""
        return tuple(m.tocsr() for m in self._build_gradient_ops())

    def cell_gradient(self, u: np.ndarray) -> np.ndarray:
        """Centred vector gradient at cell centres, shape ``(N, dim)``."""
        return np.stack([op @ u for op in self.cell_gradient_ops], axis=-1)

    def face_gradient_sq(self, u: np.ndarray) -> np.ndarray:
        """Cell average of squared face differences, ``(1/|K|) sum_f T_f du^2 / 2``.

        Summing ``face_gradient_sq * volumes`` reproduces the discrete Dirichlet
        energy ``sum_f T_f du^2`` exactly, so densities built on it integrate
        to the discrete energy.
        """
        du2 = 0.5 * self.face_trans * (u[self.face_i] - u[self.face_j]) ** 2
        acc = np.bincount(self.face_i, weights=du2, minlength=self.n_cells)
        acc += np.bincount(self.face_j, weights=du2, minlength=self.n_cells)
        return acc / self.volumes

    def boundary_tangential_derivative(self, ub: np.ndarray) -> np.ndarray:
        """Centred tangential derivative of boundary values, shape ``(Nb, dim)``."""
        return np.zeros((self.n_boundary, self.dim))

    # -- point geometry -------------------------------------------------------

    def _points(self, x) -> tuple[np.ndarray, bool]:
        arr = np.asarray(x, dtype=float)
        if self.dim == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
            arr = arr[..., None]
        single = arr.ndim == 1
        return np.atleast_2d(arr), single

    def _check_inside(self, pts: np.ndarray) -> None:
        raise NotImplementedError

    def _distance(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _project(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Foot points and outward normals for collar points."""
        raise NotImplementedError

    def signed_distance(self, x):
        """Distance from ``x`` to the boundary (non-negative inside)."""
        pts, single = self._points(x)
        self._check_inside(pts)
        d = np.maximum(self._distance(pts), 0.0)
        return float(d[0]) if single else d

    def _check_collar(self, pts: np.ndarray) -> np.ndarray:
        self._check_inside(pts)
        d = np.maximum(self._distance(pts), 0.0)
        bad = d >= self.kappa
        if np.any(bad):
            raise CollarError(
                f"point {pts[np.argmax(bad)].tolist()} at distance {d[np.argmax(bad)]:.6g} "
                f"is outside the collar of width kappa = {self.kappa:.6g}"
            )
        return d

    def nearest_boundary_point(self, x):
        """Unique nearest boundary point for ``x`` in the collar ``N_kappa``."""
        pts, single = self._points(x)
        self._check_collar(pts)
        foot, _ = self._project(pts)
        return self._shape_out(foot, single)

    def outward_normal_at(self, x):
        """Outward unit normal at the nearest boundary point of ``x``."""
        pts, single = self._points(x)
        self._check_collar(pts)
        _, nu = self._project(pts)
        return self._shape_out(nu, single)

    def reflect(self, x):
        """Reflection ``2 xi(x) - x`` across the boundary."""
        pts, single = self._points(x)
        self._check_collar(pts)
        foot, _ = self._project(pts)
        return self._shape_out(2.0 * foot - pts, single)

    def reflect_unchecked(self, pts: np.ndarray) -> np.ndarray:
        """Reflection for ``(N, dim)`` points already known to lie in the collar."""
        foot, _ = self._project(pts)
        return 2.0 * foot - pts

    def reflect_jacobian(self, pts: np.ndarray) -> np.ndarray:
        """Jacobian of the reflection, shape ``(N, dim, dim)``."""
        raise NotImplementedError

    def _shape_out(self, arr: np.ndarray, single: bool):
        if self.dim == 1:
            arr = arr[..., 0]
            return float(arr[0]) if single else arr
        return arr[0] if single else arr

    def cell_distance(self) -> np.ndarray:
        """Distance from each cell centre to the boundary."""
        return np.maximum(self._distance(self.centers), 0.0)

    def tubular_mass_region(self, delta: float) -> np.ndarray:
        """Boolean mask of cells whose centres lie within ``delta`` of the boundary.

        Raises
        ------
        ParameterError
            If ``delta`` is not in ``(0, kappa]``.
        """
        delta = float(delta)
        if not (0.0 < delta <= self.kappa * (1 + 1e-14)):
            raise ParameterError(f"delta must lie in (0, kappa={self.kappa:.6g}], got {delta!r}")
        return self.cell_distance() < delta

    def normal_extension_field(self, delta: float) -> VectorField:
        """Field ``g = chi(d/delta) nu(xi(x))`` with ``g = nu`` on the boundary.

        ``chi(r) = 1 - (10 r^3 - 15 r^4 + 6 r^5)`` on ``[0, 1]`` and zero beyond,
        so ``|g| <= 1`` and ``g`` vanishes outside ``N_delta``.  The attached
        ``gradient_bound`` is a bound on the spectral norm of the Jacobian.
        """
        delta = float(delta)
        if not (0.0 < delta <= self.kappa * (1 + 1e-14)):
            raise ParameterError(f"delta must lie in (0, kappa={self.kappa:.6g}], got {delta!r}")
        return self._normal_extension(delta)

    def _normal_extension(self, delta: float) -> VectorField:
        raise NotImplementedError

    # -- field evaluation -----------------------------------------------------

    def interpolate(self, u: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Piecewise-linear interpolation of cell values at points ``x``."""
        raise NotImplementedError

    def collar_components(self) -> list[CollarComponent]:
        """Boundary components with their inward layers of cells."""
        return []

    def _collar_to_point(self, name, s, d):
        raise NotImplementedError

    def _collar_frame(self, name, s):
        raise NotImplementedError


def _smoothstep_cutoff(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``chi(r)`` and ``chi'(r)`` for the quintic cutoff, flat at 0 and 1."""
    r = np.clip(r, 0.0, 1.0)
    chi = 1.0 - (10 * r**3 - 15 * r**4 + 6 * r**5)
    dchi = -30.0 * r**2 * (1.0 - r) ** 2
    return chi, dchi


_CHI_PRIME_MAX = 1.875  # max |chi'| = 30/16, attained at r = 1/2


class Interval1D(DomainGeometry):
    """The interval ``(a, b)`` with ``n`` uniform cells and boundary ``{a, b}``."""

    kind = "Interval1D"
    dim = 1

    def __init__(self, a: float = 0.0, b: float = 1.0, n: int = 512):
        a, b, n = float(a), float(b), int(n)
        if not b > a:
            raise ParameterError("Interval1D requires b > a")
        if n < 3:
            raise ParameterError("Interval1D requires n >= 3 cells")
        self.a, self.b, self.n = a, b, n
        h = (b - a) / n
        self.h = self.spacing = h
        self.shape = (n,)
        self.kappa = 0.5 * (b - a)
        self.exact_volume = b - a
        self.exact_boundary_measure = 2.0
        self.centers = (a + (np.arange(n) + 0.5) * h)[:, None]
        self.volumes = np.full(n, h)
        self.face_i = np.arange(n - 1)
        self.face_j = np.arange(1, n)
        self.face_trans = np.full(n - 1, 1.0 / h)
        self.b_cell = np.array([0, n - 1])
        self.b_weight = np.ones(2)
        self.b_point = np.array([[a], [b]])
        self.b_normal = np.array([[-1.0], [1.0]])
        self.b_dist = np.full(2, 0.5 * h)
        self.b_curvature = np.zeros((2, 1))
        self._freeze()

    def describe(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b, "n": self.n}

    def _build_gradient_ops(self):
        n, h = self.n, self.h
        G = sp.lil_matrix((n, n))
        for i in range(1, n - 1):
            G[i, i - 1], G[i, i + 1] = -0.5 / h, 0.5 / h
        G[0, 0:3] = np.array([-3.0, 4.0, -1.0]) / (2 * h)
        G[n - 1, n - 3:n] = np.array([1.0, -4.0, 3.0]) / (2 * h)
        return (G,)

    def _check_inside(self, pts):
        x = pts[:, 0]
        bad = (x < self.a - _TOL) | (x > self.b + _TOL) | ~np.isfinite(x)
        if np.any(bad):
            raise DomainError(f"point {x[np.argmax(bad)]!r} lies outside [{self.a}, {self.b}]")

    def _distance(self, pts):
        x = pts[:, 0]
        return np.minimum(x - self.a, self.b - x)

    def _project(self, pts):
        x = pts[:, 0]
        left = (x - self.a) <= (self.b - x)
        foot = np.where(left, self.a, self.b)[:, None]
        nu = np.where(left, -1.0, 1.0)[:, None]
        return foot, nu

    def reflect_jacobian(self, pts):
        return -np.ones((len(pts), 1, 1))

    def _normal_extension(self, delta):
        a, b = self.a, self.b

        def value(x):
            x = np.asarray(x, float)[..., 0]
            dl, dr = x - a, b - x
            cl, _ = _smoothstep_cutoff(dl / delta)
            cr, _ = _smoothstep_cutoff(dr / delta)
            return (cr - cl)[..., None]

        def jacobian(x):
            x = np.asarray(x, float)[..., 0]
            _, dl = _smoothstep_cutoff((x - a) / delta)
            _, dr = _smoothstep_cutoff((b - x) / delta)
            return (-(dr + dl) / delta)[..., None, None]

        return VectorField("normal_extension", value, jacobian, tangential=False,
                           sup_norm=1.0, gradient_bound=_CHI_PRIME_MAX / delta)

    def interpolate(self, u, x):
        x = np.asarray(x, float).reshape(-1)
        return np.interp(x, self.centers[:, 0], u)


class Channel2D(DomainGeometry):
    """``[0, Lx) x (0, Ly)``, periodic in x, with walls at ``y = 0`` and ``y = Ly``.

    Cells are indexed row-major over ``(nx, ny)``: cell ``(i, j)`` has index
    ``i * ny + j`` and centre ``((i + 1/2) hx, (j + 1/2) hy)``.
    """

    kind = "Channel2D"
    dim = 2

    def __init__(self, Lx: float = 1.0, Ly: float = 0.5, nx: int = 256, ny: int = 128):
        Lx, Ly, nx, ny = float(Lx), float(Ly), int(nx), int(ny)
        if Lx <= 0 or Ly <= 0:
            raise ParameterError("Channel2D requires positive Lx, Ly")
        if nx < 3 or ny < 4:
            raise ParameterError("Channel2D requires nx >= 3 and ny >= 4")
        self.Lx, self.Ly, self.nx, self.ny = Lx, Ly, nx, ny
        hx, hy = Lx / nx, Ly / ny
        self.hx, self.hy = hx, hy
        self.spacing = max(hx, hy)
        self.shape = (nx, ny)
        self.kappa = 0.5 * Ly
        self.exact_volume = Lx * Ly
        self.exact_boundary_measure = 2.0 * Lx

        I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        idx = I * ny + J
        self.centers = np.stack([(I.ravel() + 0.5) * hx, (J.ravel() + 0.5) * hy], axis=1)
        self.volumes = np.full(nx * ny, hx * hy)

        fx_i = idx.ravel()
        fx_j = np.roll(idx, -1, axis=0).ravel()
        fy_i = idx[:, :-1].ravel()
        fy_j = idx[:, 1:].ravel()
        self.face_i = np.concatenate([fx_i, fy_i])
        self.face_j = np.concatenate([fx_j, fy_j])
        self.face_trans = np.concatenate([np.full(fx_i.size, hy / hx), np.full(fy_i.size, hx / hy)])

        xs = (np.arange(nx) + 0.5) * hx
        self.b_cell = np.concatenate([idx[:, 0], idx[:, -1]])
        self.b_weight = np.full(2 * nx, hx)
        self.b_point = np.concatenate([np.stack([xs, np.zeros(nx)], 1), np.stack([xs, np.full(nx, Ly)], 1)])
        self.b_normal = np.concatenate([np.tile([0.0, -1.0], (nx, 1)), np.tile([0.0, 1.0], (nx, 1))])
        self.b_dist = np.full(2 * nx, 0.5 * hy)
        self.b_curvature = np.zeros((2 * nx, 2))
        self._freeze()

    def describe(self) -> dict:
        return {"kind": self.kind, "Lx": self.Lx, "Ly": self.Ly, "nx": self.nx, "ny": self.ny}

    def index(self, i, j):
        return np.asarray(i) * self.ny + np.asarray(j)

    def _build_gradient_ops(self):
        nx, ny, hx, hy = self.nx, self.ny, self.hx, self.hy
        n = nx * ny
        I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        idx = (I * ny + J).ravel()
        right = (((I + 1) % nx) * ny + J).ravel()
        left = (((I - 1) % nx) * ny + J).ravel()
        Gx = sp.coo_matrix(
            (np.concatenate([np.full(n, 0.5 / hx), np.full(n, -0.5 / hx)]),
             (np.concatenate([idx, idx]), np.concatenate([right, left]))), shape=(n, n))
        rows, cols, vals = [], [], []
        Jr = J.ravel()
        interior = (Jr > 0) & (Jr < ny - 1)
        r = idx[interior]
        rows += [r, r]
        cols += [r + 1, r - 1]
        vals += [np.full(r.size, 0.5 / hy), np.full(r.size, -0.5 / hy)]
        lo = idx[Jr == 0]
        for off, c in zip((0, 1, 2), (-3.0, 4.0, -1.0)):
            rows.append(lo)
            cols.append(lo + off)
            vals.append(np.full(lo.size, c / (2 * hy)))
        hi = idx[Jr == ny - 1]
        for off, c in zip((0, -1, -2), (3.0, -4.0, 1.0)):
            rows.append(hi)
            cols.append(hi + off)
            vals.append(np.full(hi.size, c / (2 * hy)))
        Gy = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
        return Gx, Gy

    def boundary_tangential_derivative(self, ub):
        nx = self.nx
        out = np.zeros((2 * nx, 2))
        for part in (slice(0, nx), slice(nx, 2 * nx)):
            v = ub[part]
            out[part, 0] = (np.roll(v, -1) - np.roll(v, 1)) / (2 * self.hx)
        return out

    def _check_inside(self, pts):
        y = pts[:, 1]
        bad = (y < -_TOL) | (y > self.Ly + _TOL) | ~np.all(np.isfinite(pts), axis=1)
        if np.any(bad):
            raise DomainError(f"point {pts[np.argmax(bad)].tolist()} lies outside 0 <= y <= {self.Ly}")

    def _distance(self, pts):
        y = pts[:, 1]
        return np.minimum(y, self.Ly - y)

    def _project(self, pts):
        y = pts[:, 1]
        bottom = y <= self.Ly - y
        foot = np.stack([pts[:, 0], np.where(bottom, 0.0, self.Ly)], axis=1)
        nu = np.stack([np.zeros(len(y)), np.where(bottom, -1.0, 1.0)], axis=1)
        return foot, nu

    def reflect_jacobian(self, pts):
        J = np.zeros((len(pts), 2, 2))
        J[:, 0, 0] = 1.0
        J[:, 1, 1] = -1.0
        return J

    def _normal_extension(self, delta):
        Ly = self.Ly

        def value(x):
            x = np.asarray(x, float)
            y = x[..., 1]
            cb, _ = _smoothstep_cutoff(y / delta)
            ct, _ = _smoothstep_cutoff((Ly - y) / delta)
            out = np.zeros_like(x)
            out[..., 1] = ct - cb
            return out

        def jacobian(x):
            x = np.asarray(x, float)
            y = x[..., 1]
            _, db = _smoothstep_cutoff(y / delta)
            _, dt = _smoothstep_cutoff((Ly - y) / delta)
            J = np.zeros(x.shape + (2,))
            J[..., 1, 1] = -(dt + db) / delta
            return J

        return VectorField("normal_extension", value, jacobian, tangential=False,
                           sup_norm=1.0, gradient_bound=_CHI_PRIME_MAX / delta)

    def interpolate(self, u, x):
        x = np.atleast_2d(np.asarray(x, float))
        U = u.reshape(self.nx, self.ny)
        fx = np.mod(x[:, 0], self.Lx) / self.hx - 0.5
        fy = np.clip(x[:, 1] / self.hy - 0.5, 0.0, self.ny - 1.0)
        i0 = np.floor(fx).astype(int)
        tx = fx - i0
        j0 = np.minimum(np.floor(fy).astype(int), self.ny - 2)
        ty = fy - j0
        i0m, i1m = i0 % self.nx, (i0 + 1) % self.nx
        return ((1 - tx) * (1 - ty) * U[i0m, j0] + tx * (1 - ty) * U[i1m, j0]
                + (1 - tx) * ty * U[i0m, j0 + 1] + tx * ty * U[i1m, j0 + 1])

    def collar_components(self):
        nx, ny = self.nx, self.ny
        half = ny // 2
        s = (np.arange(nx) + 0.5) * self.hx
        depths = (np.arange(half) + 0.5) * self.hy
        bottom = tuple(np.arange(nx) * ny + j for j in range(half))
        top = tuple(np.arange(nx) * ny + (ny - 1 - j) for j in range(half))
        return [
            CollarComponent("bottom", self.Lx, s, depths, bottom, self),
            CollarComponent("top", self.Lx, s, depths, top, self),
        ]

    def _collar_to_point(self, name, s, d):
        y = d if name == "bottom" else self.Ly - d
        return np.stack(np.broadcast_arrays(np.mod(s, self.Lx), y), axis=-1)

    def _collar_frame(self, name, s):
        nu = np.array([0.0, -1.0]) if name == "bottom" else np.array([0.0, 1.0])
        return np.array([1.0, 0.0]), nu


class Disk2D(DomainGeometry):
    """Disk of radius ``R`` on a polar grid of ``n_r x n_theta`` cells.

    Cell ``(j, k)`` spans radii ``[j dr, (j+1) dr]`` and angles
    ``[k dth, (k+1) dth]``; index ``j * n_theta + k``.  Cells of the innermost
    ring are wedges with a degenerate inner face, so the axis carries no
    special stencil.  ``n_theta`` must be even so that every inner-ring cell
    has a partner across the axis.
    """

    kind = "Disk2D"
    dim = 2

    def __init__(self, R: float = 1.0, n_r: int = 64, n_theta: int = 256):
        R, n_r, n_theta = float(R), int(n_r), int(n_theta)
        if R <= 0:
            raise ParameterError("Disk2D requires R > 0")
        if n_r < 3 or n_theta < 8 or n_theta % 2:
            raise ParameterError("Disk2D requires n_r >= 3 and an even n_theta >= 8")
        self.R, self.n_r, self.n_theta = R, n_r, n_theta
        dr, dth = R / n_r, 2 * math.pi / n_theta
        self.dr, self.dtheta = dr, dth
        self.spacing = dr
        self.shape = (n_r, n_theta)
        self.kappa = R
        self.exact_volume = math.pi * R * R
        self.exact_boundary_measure = 2 * math.pi * R

        J, K = np.meshgrid(np.arange(n_r), np.arange(n_theta), indexing="ij")
        idx = J * n_theta + K
        self.r_c = (np.arange(n_r) + 0.5) * dr
        self.theta_c = (np.arange(n_theta) + 0.5) * dth
        rc = self.r_c[J.ravel()]
        tc = self.theta_c[K.ravel()]
        self.centers = np.stack([rc * np.cos(tc), rc * np.sin(tc)], axis=1)
        r_lo, r_hi = J.ravel() * dr, (J.ravel() + 1) * dr
        self.volumes = 0.5 * dth * (r_hi**2 - r_lo**2)

        fr_i = idx[:-1, :].ravel()
        fr_j = idx[1:, :].ravel()
        fr_T = ((J[:-1, :].ravel() + 1) * dr * dth) / dr
        fa_i = idx.ravel()
        fa_j = np.roll(idx, -1, axis=1).ravel()
        fa_T = dr / (rc * dth)
        self.face_i = np.concatenate([fr_i, fa_i])
        self.face_j = np.concatenate([fr_j, fa_j])
        self.face_trans = np.concatenate([fr_T, fa_T])

        self.b_cell = idx[-1, :].copy()
        self.b_weight = np.full(n_theta, R * dth)
        ct, st = np.cos(self.theta_c), np.sin(self.theta_c)
        self.b_normal = np.stack([ct, st], axis=1)
        self.b_point = R * self.b_normal
        self.b_dist = np.full(n_theta, 0.5 * dr)
        self.b_curvature = -self.b_normal / R
        self._freeze()

    def describe(self) -> dict:
        return {"kind": self.kind, "R": self.R, "n_r": self.n_r, "n_theta": self.n_theta}

    def _build_gradient_ops(self):
        n_r, n_t, dr, dth = self.n_r, self.n_theta, self.dr, self.dtheta
        n = n_r * n_t
        J, K = np.meshgrid(np.arange(n_r), np.arange(n_t), indexing="ij")
        idx = (J * n_t + K).ravel()
        Jr, Kr = J.ravel(), K.ravel()
        rc = self.r_c[Jr]
        th = self.theta_c[Kr]
        c, s = np.cos(th), np.sin(th)

        # radial derivative stencil
        rows, cols, vals = [], [], []
        mid = (Jr > 0) & (Jr < n_r - 1)
        rows += [idx[mid], idx[mid]]
        cols += [idx[mid] + n_t, idx[mid] - n_t]
        vals += [np.full(mid.sum(), 0.5 / dr), np.full(mid.sum(), -0.5 / dr)]
        axis = Jr == 0
        across = (Kr[axis] + n_t // 2) % n_t
        rows += [idx[axis], idx[axis]]
        cols += [idx[axis] + n_t, across]
        vals += [np.full(axis.sum(), 0.5 / dr), np.full(axis.sum(), -0.5 / dr)]
        outer = Jr == n_r - 1
        for off, cf in zip((0, -1, -2), (3.0, -4.0, 1.0)):
            rows.append(idx[outer])
            cols.append(idx[outer] + off * n_t)
            vals.append(np.full(outer.sum(), cf / (2 * dr)))
        Dr = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()

        nxt = (Jr * n_t + (Kr + 1) % n_t)
        prv = (Jr * n_t + (Kr - 1) % n_t)
        w = 0.5 / (rc * dth)
        Dt = sp.coo_matrix((np.concatenate([w, -w]), (np.concatenate([idx, idx]), np.concatenate([nxt, prv]))),
                           shape=(n, n)).tocsr()
        Gx = sp.diags(c) @ Dr - sp.diags(s) @ Dt
        Gy = sp.diags(s) @ Dr + sp.diags(c) @ Dt
        return Gx, Gy

    def boundary_tangential_derivative(self, ub):
        d = (np.roll(ub, -1) - np.roll(ub, 1)) / (2 * self.R * self.dtheta)
        tangent = np.stack([-np.sin(self.theta_c), np.cos(self.theta_c)], axis=1)
        return d[:, None] * tangent

    def _check_inside(self, pts):
        r = np.hypot(pts[:, 0], pts[:, 1])
        bad = (r > self.R * (1 + _TOL)) | ~np.all(np.isfinite(pts), axis=1)
        if np.any(bad):
            raise DomainError(f"point {pts[np.argmax(bad)].tolist()} lies outside the disk of radius {self.R}")

    def _distance(self, pts):
        return self.R - np.hypot(pts[:, 0], pts[:, 1])

    def _project(self, pts):
        r = np.hypot(pts[:, 0], pts[:, 1])
        nu = pts / r[:, None]
        return self.R * nu, nu

    def reflect_jacobian(self, pts):
        r = np.hypot(pts[:, 0], pts[:, 1])
        a = 2 * self.R / r - 1.0
        xx = np.einsum("ni,nj->nij", pts, pts)
        return a[:, None, None] * np.eye(2) - (2 * self.R / r**3)[:, None, None] * xx

    def _normal_extension(self, delta):
        R = self.R

        def value(x):
            x = np.asarray(x, float)
            r = np.hypot(x[..., 0], x[..., 1])
            chi, _ = _smoothstep_cutoff((R - r) / delta)
            safe = np.where(r > 0, r, 1.0)
            return (chi / safe)[..., None] * x * (r > 0)[..., None]

        def jacobian(x):
            x = np.asarray(x, float)
            r = np.hypot(x[..., 0], x[..., 1])
            chi, dchi = _smoothstep_cutoff((R - r) / delta)
            safe = np.where(r > 0, r, 1.0)
            xh = x / safe[..., None]
            P = np.einsum("...i,...j->...ij", xh, xh)
            J = -(dchi / delta)[..., None, None] * P + (chi / safe)[..., None, None] * (np.eye(2) - P)
            return J * (r > 0)[..., None, None]

        rr = np.linspace(max(R - delta, 0.0), R, 20001)[1:]
        chi, dchi = _smoothstep_cutoff((R - rr) / delta)
        bound = float(np.max(np.maximum(np.abs(dchi) / delta, chi / rr)))
        return VectorField("normal_extension", value, jacobian, tangential=False,
                           sup_norm=1.0, gradient_bound=bound * (1 + 1e-6))

    def interpolate(self, u, x):
        x = np.atleast_2d(np.asarray(x, float))
        U = u.reshape(self.n_r, self.n_theta)
        r = np.hypot(x[:, 0], x[:, 1])
        th = np.mod(np.arctan2(x[:, 1], x[:, 0]), 2 * math.pi)
        ft = th / self.dtheta - 0.5
        k0 = np.floor(ft).astype(int)
        tt = ft - k0
        k0m, k1m = k0 % self.n_theta, (k0 + 1) % self.n_theta
        fr = np.minimum(r / self.dr - 0.5, self.n_r - 1.0)
        j0 = np.minimum(np.floor(fr).astype(int), self.n_r - 2)
        tr = fr - j0

        def ring(j):
            return (1 - tt) * U[j, k0m] + tt * U[j, k1m]

        jc = np.maximum(j0, 0)
        out = (1 - tr) * ring(jc) + tr * ring(jc + 1)
        normal = j0 >= 0
        if np.any(~normal):
            # Between the axis and the first ring: interpolate across the axis.
            k_op = (k0 + self.n_theta // 2) % self.n_theta
            k_op1 = (k_op + 1) % self.n_theta
            opp = (1 - tt) * U[0, k_op] + tt * U[0, k_op1]
            own = ring(0)
            wgt = (r / self.dr + 0.5)  # signed position from -dr/2 to dr/2
            m = ~normal
            out[m] = (1 - wgt[m]) * opp[m] + wgt[m] * own[m]
        return out

    def collar_components(self):
        n_r, n_t = self.n_r, self.n_theta
        s = self.R * self.theta_c
        depths = self.R - self.r_c[::-1]
        layers = tuple(j * n_t + np.arange(n_t) for j in range(n_r - 1, -1, -1))
        return [CollarComponent("circle", 2 * math.pi * self.R, s, depths, layers, self)]

    def _collar_to_point(self, name, s, d):
        th = s / self.R
        r = self.R - d
        return np.stack(np.broadcast_arrays(r * np.cos(th), r * np.sin(th)), axis=-1)

    def _collar_frame(self, name, s):
        th = s / self.R
        return np.array([-math.sin(th), math.cos(th)]), np.array([math.cos(th), math.sin(th)])


def make_domain(spec: dict) -> DomainGeometry:
    """Build a domain from a config mapping with a ``kind`` key."""
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "Interval1D":
        return Interval1D(**spec)
    if kind == "Channel2D":
        return Channel2D(**spec)
    if kind == "Disk2D":
        return Disk2D(**spec)
    raise ParameterError(f"unknown domain kind {kind!r}")
