import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from nets.errors import ImmersionFailureError, InconsistentGaugeError, NotTriplyOrthogonalError, UsageError
from nets.lorentz import inner
from nets.samples import cartesian_net, confocal_net, sheared_net, spherical_net
from nets.stencils import convergence_order, max_interior
from nets.triorth import (
    LameData,
    NetGrid,
    best_guichard,
    channel_residuals,
    conformal_rescale,
    curvature_sphere,
    dupin_residual,
    genlame_residuals,
    guichard_angle,
    guichard_residual,
    is_channel_family,
    lame_from_grid,
    lame_residuals,
    lame_sphere_curvatures,
    orthogonality_residual,
    partner_points,
    w_split_residual,
)

N = 9


def lame_data(l1, l2, l3, h):
    l = np.stack([l1, l2, l3])
    k = np.zeros((3, 3) + l1.shape)
    return LameData(l=l, k=k, b=np.zeros_like(k), spacing=(h, h, h))


def unit_cube(n=N):
    axis = np.linspace(0.0, 1.0, n)
    return np.meshgrid(axis, axis, axis, indexing='ij'), float(axis[1] - axis[0])


class NetGridTests(SimpleTestCase):
    def test_rejects_spacelike_points(self):
        f = np.zeros((6, 6, 6, 5))
        f[..., 0] = 1.0
        with self.assertRaises(UsageError):
            NetGrid(f=f, spacing=(0.1, 0.1, 0.1))

    def test_rejects_small_grids(self):
        net = cartesian_net((5, 5, 5))
        with self.assertRaises(UsageError):
            NetGrid(f=net.f[:4], spacing=net.spacing)

    def test_axes(self):
        net = cartesian_net((5, 6, 7))
        assert_allclose(net.axis(2), np.linspace(0.0, 1.0, 7))
        self.assertTrue(net.gauged)


class CartesianTests(SimpleTestCase):
    def test_lame_functions(self):
        ld = lame_from_grid(cartesian_net((N, N, N)))
        assert_allclose(ld.l, 1.0, atol=1e-14)
        assert_allclose(ld.k, 0.0, atol=1e-12)
        assert_allclose(ld.b, 0.0, atol=1e-10)
        self.assertLess(max(lame_residuals(ld, 0.0)), 1e-10)
        self.assertLess(max(genlame_residuals(ld)), 1e-8)

    def test_stretched_axis(self):
        net = cartesian_net((N, N, N), stretch=(lambda t: t + 0.5 * t ** 2, lambda t: 1.0 + t))
        ld = lame_from_grid(net)
        assert_allclose(ld.l[0], 1.0 + net.axis(0)[:, None, None] * np.ones(net.shape), atol=1e-14)
        self.assertLess(max(lame_residuals(ld, 0.0)), 1e-10)
        self.assertEqual(orthogonality_residual(net), 0.0)
        self.assertLess(dupin_residual(net), 1e-12)

    def test_wrong_curvature_fails(self):
        ld = lame_from_grid(cartesian_net((N, N, N)))
        self.assertAlmostEqual(max(lame_residuals(ld, 1.0)[:3]), 1.0, places=8)

    def test_vanishing_tangent(self):
        net = cartesian_net((N, N, N), stretch=(lambda t: t ** 2, lambda t: 2.0 * t))
        with self.assertRaises(ImmersionFailureError):
            lame_from_grid(net)


class SphericalTests(SimpleTestCase):
    def setUp(self):
        self.net = spherical_net((25, 25, 25))

    def test_lame_functions(self):
        ld = lame_from_grid(self.net)
        rho = self.net.axis(0)[:, None, None]
        theta = self.net.axis(1)[None, :, None]
        assert_allclose(ld.l[1], np.broadcast_to(rho, self.net.shape), rtol=1e-12)
        assert_allclose(ld.l[2], np.broadcast_to(rho * np.sin(theta), self.net.shape), rtol=1e-12)

    def test_flat_lame_equations(self):
        ld = lame_from_grid(self.net)
        self.assertLess(max(lame_residuals(ld, 0.0)), 2e-2)
        self.assertLess(max(genlame_residuals(ld)), 1e-8)
        self.assertLess(ld.b_asymmetry(), 1e-10)

    def test_curvature_lines(self):
        self.assertLess(dupin_residual(self.net), 1e-2)

    def test_finite_difference_tangents(self):
        ld = lame_from_grid(spherical_net((25, 25, 25), exact=False))
        self.assertLess(max(lame_residuals(ld, 0.0)[:3]), 5e-2)

    def test_not_guichard(self):
        axis, residual = best_guichard(lame_from_grid(self.net))
        self.assertGreater(residual, 0.1)


class ShearedTests(SimpleTestCase):
    def test_not_triply_orthogonal(self):
        net = sheared_net((N, N, N), shear=0.3)
        self.assertAlmostEqual(orthogonality_residual(net), 0.3 / np.sqrt(1.09), places=12)
        with self.assertRaises(NotTriplyOrthogonalError) as ctx:
            lame_from_grid(net)
        self.assertIsNotNone(ctx.exception.node)


class GuichardTests(SimpleTestCase):
    def test_trigonometric_angle(self):
        (t1, t2, t3), h = unit_cube()
        w = 0.5 + 0.2 * t1 * t2 + 0.3 * t3 ** 2
        ld = lame_data(np.cos(w), np.sin(w), np.ones_like(w), h)
        self.assertLess(guichard_residual(ld, 2), 1e-14)
        self.assertEqual(best_guichard(ld)[0], 2)
        assert_allclose(guichard_angle(ld, 1), w, atol=1e-14)
        w13, w23 = w_split_residual(ld, 1)
        self.assertLess(max(w13, w23), 1e-10)

    def test_hyperbolic_angle(self):
        (t1, t2, t3), h = unit_cube()
        w = 0.2 + t1 - t2 + 0.5 * t3
        ld = lame_data(np.cosh(w), np.sinh(w), np.ones_like(w), h)
        assert_allclose(guichard_angle(ld, -1), w, atol=1e-12)

    def test_coupled_angle(self):
        (t1, t2, t3), h = unit_cube()
        w = 0.5 + 0.2 * t1 * t3
        ld = lame_data(np.cos(w), np.sin(w), np.ones_like(w), h)
        w13, _ = w_split_residual(ld, 1)
        self.assertAlmostEqual(w13, 0.2, places=8)

    def test_inconsistent_gauge(self):
        (t1, _, _), h = unit_cube()
        one = np.ones_like(t1)
        with self.assertRaises(InconsistentGaugeError):
            guichard_angle(lame_data(one, one, one, h), 1)
        with self.assertRaises(UsageError):
            guichard_angle(lame_data(one, one, one, h), 0.5)

    def test_axis_guard(self):
        (t1, _, _), h = unit_cube()
        one = np.ones_like(t1)
        with self.assertRaises(UsageError):
            guichard_residual(lame_data(one, one, one, h), 3)


def rescaled_spherical(n):
    """Spherical net times e^u for a weight linear in (rho, theta, phi)."""
    net = spherical_net((n, n, n))
    rho, theta, phi = np.meshgrid(*(net.axis(a) for a in range(3)), indexing='ij')
    slopes = (0.3, -0.4, 0.2)
    return conformal_rescale(net, slopes[0] * rho + slopes[1] * theta + slopes[2] * phi, slopes)


class ConformalRescaleTests(SimpleTestCase):
    def test_partner_points(self):
        net = rescaled_spherical(9)
        fhat = partner_points(net)
        assert_allclose(inner(fhat, fhat), 0.0, atol=1e-12)
        assert_allclose(inner(fhat, net.f), 1.0, atol=1e-12)
        for a in range(3):
            assert_allclose(inner(fhat, net.derivative(a)), 0.0, atol=1e-12)

    def test_flatness_equations_survive_rescaling(self):
        plain = lame_from_grid(spherical_net((33, 33, 33)))
        ld = lame_from_grid(rescaled_spherical(33))
        self.assertLess(float(np.max(np.abs(plain.b))), 1e-10)
        self.assertGreater(float(np.max(np.abs(ld.b))), 1e-3)
        self.assertLess(max(genlame_residuals(ld)), 1e-2)
        self.assertLess(ld.b_asymmetry(), 1e-2)
        gap = lame_sphere_curvatures(ld) - ld.b
        self.assertLess(max(max_interior(gap[i, j], 3, 3) for i in range(3) for j in range(3)), 1e-2)

    def test_rejects_bad_weight(self):
        net = spherical_net((9, 9, 9))
        with self.assertRaises(UsageError):
            conformal_rescale(net, np.zeros((9, 9)), (0.0, 0.0, 0.0))


class ConvergenceTests(SimpleTestCase):
    """17^3 against 33^3 on the same box; margins double so the same nodes are compared."""

    def test_second_order(self):
        coarse_net, fine_net = rescaled_spherical(17), rescaled_spherical(33)
        coarse, fine = lame_from_grid(coarse_net), lame_from_grid(fine_net)
        pairs = {
            'genlame': (max(genlame_residuals(coarse, margin=3)), max(genlame_residuals(fine, margin=6))),
            'b_asymmetry': (coarse.b_asymmetry(margin=2), fine.b_asymmetry(margin=4)),
            'dupin': (dupin_residual(coarse_net, margin=2), dupin_residual(fine_net, margin=4)),
        }
        for name, (low, high) in pairs.items():
            with self.subTest(name):
                self.assertGreater(low, 1e-9)
                self.assertGreater(convergence_order(low, high), 1.9)

    def test_mixed_angle_derivative(self):
        errors = []
        for n in (17, 33):
            (t1, t2, t3), h = unit_cube(n)
            w = 0.5 + 0.2 * np.sin(t1) * np.sin(t3)
            ld = lame_data(np.cos(w), np.sin(w), np.ones_like(w), h)
            w13, _ = w_split_residual(ld, 1, margin=n // 8)
            # interior maximum of 0.2 cos t1 cos t3 sits at the margin corner
            corner = (n // 8) * h
            errors.append(abs(w13 - 0.2 * np.cos(corner) ** 2))
        self.assertGreater(convergence_order(*errors), 1.9)


class ChannelSurfaceTests(SimpleTestCase):
    def test_spherical_families(self):
        net = spherical_net((17, 17, 17))
        ld = lame_from_grid(net)
        for axis in range(3):
            with self.subTest(axis=axis):
                self.assertTrue(is_channel_family(net, axis, tol=1e-2, ld=ld))

    def test_curvature_spheres_ignore_the_gauge(self):
        plain = spherical_net((17, 17, 17))
        rescaled = rescaled_spherical(17)
        for axis, direction in ((0, 1), (1, 0), (2, 1)):
            before = curvature_sphere(plain, lame_from_grid(plain), axis, direction)
            after = curvature_sphere(rescaled, lame_from_grid(rescaled), axis, direction)
            assert_allclose(after[1:-1, 1:-1, 1:-1], before[1:-1, 1:-1, 1:-1], atol=1e-2)
            assert_allclose(inner(after, after), 1.0, atol=1e-2)

    def test_confocal_quadrics(self):
        net = confocal_net((17, 17, 17))
        self.assertLess(orthogonality_residual(net), 1e-10)
        ld = lame_from_grid(net)
        for axis in range(3):
            with self.subTest(axis=axis):
                self.assertGreater(min(channel_residuals(net, axis, ld).values()), 2e-2)
                self.assertFalse(is_channel_family(net, axis, tol=1e-2, ld=ld))

    def test_needs_two_axes(self):
        net = spherical_net()
        with self.assertRaises(UsageError):
            curvature_sphere(net, lame_from_grid(net), 1, 1)
