import math

import numpy as np
import pytest

from contactflow.errors import CollarError, DomainError, ParameterError
from contactflow.geometry import Channel2D, Disk2D, Interval1D, make_domain


def test_signed_distance_examples():
    assert Channel2D(1, 0.5, 16, 8).signed_distance([0.3, 0.1]) == pytest.approx(0.1, abs=1e-15)
    assert Disk2D(1, 8, 16).signed_distance([0.6, 0.0]) == pytest.approx(0.4, abs=1e-15)
    assert Interval1D(0, 1, 8).signed_distance(0.5) == pytest.approx(0.5, abs=1e-15)


def test_signed_distance_zero_on_boundary():
    d = Disk2D(1, 8, 16)
    assert d.signed_distance([0.0, 1.0]) == 0.0
    assert Channel2D(1, 0.5, 8, 4).signed_distance([0.7, 0.5]) == 0.0


@pytest.mark.parametrize("dom, x", [
    (Channel2D(1, 0.5, 8, 4), [0.3, -0.01]),
    (Disk2D(1, 8, 16), [0.9, 0.5]),
    (Interval1D(0, 1, 8), 1.2),
])
def test_points_outside_closure_raise(dom, x):
    with pytest.raises(DomainError):
        dom.signed_distance(x)


def test_nearest_boundary_point_examples():
    np.testing.assert_allclose(Channel2D(1, 0.5, 16, 8).nearest_boundary_point([0.3, 0.1]), [0.3, 0.0])
    np.testing.assert_allclose(Disk2D(1, 8, 16).nearest_boundary_point([0.6, 0.0]), [1.0, 0.0])
    assert Interval1D(0, 1, 8).nearest_boundary_point(0.2) == 0.0


def test_reflect_examples():
    np.testing.assert_allclose(Channel2D(1, 0.5, 16, 8).reflect([0.3, 0.1]), [0.3, -0.1], atol=1e-15)
    np.testing.assert_allclose(Disk2D(1, 8, 16).reflect([0.6, 0.0]), [1.4, 0.0], atol=1e-15)
    assert Interval1D(0, 1, 8).reflect(0.2) == pytest.approx(-0.2, abs=1e-15)


def test_collar_errors():
    ch = Channel2D(1, 0.5, 16, 8)
    assert ch.kappa == 0.25
    with pytest.raises(CollarError):
        ch.reflect([0.3, 0.25])
    with pytest.raises(CollarError):
        Disk2D(1, 8, 16).nearest_boundary_point([0.0, 0.0])


@pytest.mark.parametrize("dom", [Channel2D(1, 0.5, 32, 16), Disk2D(1, 16, 32), Interval1D(0, 1, 32)])
def test_reflection_involution_and_isometry_on_grid(dom):
    pts = dom.centers[dom.cell_distance() < dom.kappa]
    foot, _ = dom._project(pts)
    r = dom.reflect_unchecked(pts)
    # reflected points lie outside the domain; fold them back through the same foot point
    back = 2.0 * foot - r
    assert np.max(np.abs(back - pts)) <= 1e-12
    d_in = np.linalg.norm(pts - foot, axis=-1)
    d_out = np.linalg.norm(r - foot, axis=-1)
    assert np.max(np.abs(d_in - d_out)) <= 1e-12


def test_disk_reflection_is_involution():
    d = Disk2D(1, 16, 32)
    rng = np.random.default_rng(3)
    r = rng.uniform(0.05, 0.95, 500)
    th = rng.uniform(0, 2 * np.pi, 500)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    pts = pts[np.linalg.norm(pts, axis=-1) > 0.05]
    twice = d.reflect_unchecked(d.reflect_unchecked(pts))
    assert np.max(np.abs(twice - pts)) <= 1e-12


@pytest.mark.parametrize("dom, vol, per", [
    (Channel2D(1, 0.5, 40, 24), 0.5, 2.0),
    (Channel2D(2.0, 0.75, 33, 17), 1.5, 4.0),
    (Disk2D(1, 20, 48), math.pi, 2 * math.pi),
    (Disk2D(0.7, 11, 30), math.pi * 0.49, 2 * math.pi * 0.7),
    (Interval1D(-1, 2, 37), 3.0, 2.0),
])
def test_quadrature_exactness(dom, vol, per):
    assert dom.volumes.sum() == pytest.approx(vol, rel=1e-12)
    assert dom.b_weight.sum() == pytest.approx(per, rel=1e-12)
    assert dom.exact_volume == pytest.approx(vol, rel=1e-15)
    assert dom.exact_boundary_measure == pytest.approx(per, rel=1e-15)


def test_normals_are_unit_and_curvature_data():
    disk = Disk2D(2.0, 16, 40)
    np.testing.assert_allclose(np.linalg.norm(disk.b_normal, axis=-1), 1.0, atol=1e-15)
    assert disk.kappa == 2.0
    np.testing.assert_allclose(disk.b_curvature, -disk.b_normal / 2.0, atol=1e-15)
    ch = Channel2D(1, 0.5, 8, 4)
    assert np.all(ch.b_curvature == 0.0)


def test_tubular_region_channel_volume():
    ch = Channel2D(1, 0.5, 64, 40)
    vol = ch.volumes[ch.tubular_mass_region(0.1)].sum()
    assert vol == pytest.approx(0.2, abs=1e-12)


def test_tubular_region_disk_annulus():
    d = Disk2D(1, 64, 32)
    vol = d.volumes[d.tubular_mass_region(0.25)].sum()
    assert vol == pytest.approx(0.4375 * math.pi, rel=1e-12)
    full = d.volumes[d.tubular_mass_region(d.kappa)].sum()
    assert full < math.pi + 1e-12


@pytest.mark.parametrize("delta", [0.0, -0.1, 0.3])
def test_tubular_region_rejects_bad_delta(delta):
    with pytest.raises(ParameterError):
        Channel2D(1, 0.5, 8, 4).tubular_mass_region(delta)


def test_normal_extension_channel_values():
    g = Channel2D(1, 0.5, 8, 4).normal_extension_field(0.1)
    np.testing.assert_allclose(g.value(np.array([[0.4, 0.0]])), [[0.0, -1.0]], atol=1e-15)
    np.testing.assert_allclose(g.value(np.array([[0.4, 0.5]])), [[0.0, 1.0]], atol=1e-15)
    np.testing.assert_allclose(g.value(np.array([[0.4, 0.25]])), [[0.0, 0.0]], atol=1e-15)


def test_normal_extension_disk_and_bound():
    d = Disk2D(1, 8, 16)
    g = d.normal_extension_field(0.3)
    np.testing.assert_allclose(g.value(np.array([[1.0, 0.0]])), [[1.0, 0.0]], atol=1e-15)
    rng = np.random.default_rng(0)
    r = np.sqrt(rng.uniform(0, 1, 10_000))
    th = rng.uniform(0, 2 * np.pi, 10_000)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], -1)
    vals = g.value(pts)
    assert np.max(np.linalg.norm(vals, axis=-1)) <= 1.0 + 1e-15
    assert np.all(vals[r < 0.7 - 1e-12] == 0.0)


@pytest.mark.parametrize("dom", [Channel2D(1, 0.5, 8, 4), Disk2D(1, 8, 16), Interval1D(0, 1, 8)])
def test_normal_extension_jacobian_matches_differences(dom):
    g = dom.normal_extension_field(dom.kappa * 0.8)
    rng = np.random.default_rng(1)
    pts = dom.centers[rng.choice(dom.n_cells, size=min(20, dom.n_cells), replace=False)]
    h = 1e-6
    J = g.jacobian(pts)
    for k in range(dom.dim):
        e = np.zeros(dom.dim)
        e[k] = h
        fd = (g.value(pts + e) - g.value(pts - e)) / (2 * h)
        np.testing.assert_allclose(J[..., k], fd, atol=1e-5)
    assert np.max(np.linalg.norm(J, ord=2, axis=(-2, -1))) <= g.gradient_bound + 1e-12


def test_make_domain_roundtrip():
    for dom in (Channel2D(1, 0.5, 8, 4), Disk2D(1, 8, 16), Interval1D(0, 1, 8)):
        again = make_domain(dom.describe())
        assert again.describe() == dom.describe()
        np.testing.assert_array_equal(again.volumes, dom.volumes)
