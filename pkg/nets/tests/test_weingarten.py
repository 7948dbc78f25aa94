import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from nets.errors import (
    BranchAmbiguityError,
    DegenerateQuarticError,
    DomainError,
    ExcludedCaseError,
    InconsistentAnsatzError,
    InfinityBoundaryError,
    SingularNetError,
    UsageError,
)
from nets.lorentz import inner
from nets.spaceform import base_normal, base_point
from nets.strip import ParamGrid2
from nets.stencils import convergence_order, interior
from nets.triorth import (
    channel_residuals,
    genlame_residuals,
    guichard_residual,
    is_channel_family,
    lame_from_grid,
    orthogonality_residual,
    w_split_residual,
)
from nets.weingarten import (
    branch_cross_ratio,
    branch_points,
    case_invariant,
    elliptic_reparam,
    family_coeffs,
    fit_pendulum,
    guichard_axis,
    parallel_frame_at,
    pendulum_residual,
    principal_curvatures_at,
    rebase,
    reduced_lame,
    reduced_lame_residuals,
    sine_gordon_profile,
    sine_gordon_residual,
    slice_curvatures,
    synthesize_net,
)

SPAN = (-0.08, 0.08)


def flagship():
    return family_coeffs(0.0, 0.0, 1.0, -1)


def relation(wf, t, k1, k2):
    return wf.cK(t) * k1 * k2 + wf.cH(t) * (k1 + k2) + wf.c(t)


class FamilyTests(SimpleTestCase):
    def test_flagship_coefficients(self):
        wf = flagship()
        self.assertEqual(wf.cK.coefficients, (-1.0, 0.0, 1.0))
        self.assertEqual(wf.cH.coefficients, (0.0, 1.0, -0.0))
        self.assertEqual(wf.c.coefficients, (0.0, -0.0, -1.0))
        self.assertEqual(wf.eps, 'i')

    def test_guards(self):
        with self.assertRaises(ExcludedCaseError):
            family_coeffs(0.0, 0.5, 0.0, 1)
        with self.assertRaises(UsageError):
            family_coeffs(0.0, 0.5, 1.0, 2)
        with self.assertRaises(UsageError):
            family_coeffs(float('nan'), 0.5, 1.0, 1)

    def test_case_invariant_vanishes(self):
        rng = np.random.default_rng(7)
        ts = np.linspace(-0.4, 0.4, 9)
        worst = 0.0
        for _ in range(10000):
            k, a1 = rng.uniform(-2, 2, size=2)
            wf = family_coeffs(k, a1, rng.uniform(0.1, 2.0), rng.choice([-1, 1]))
            worst = max(worst, float(np.max(np.abs(case_invariant(wf, ts)))))
        self.assertLess(worst, 1e-10)

    def test_quadratic_roots(self):
        wf = flagship()
        assert_allclose(wf.cK.real_roots(), [-1.0, 1.0], atol=1e-12)
        self.assertEqual(wf.cH.degree(), 1)


class ParallelSurfaceTests(SimpleTestCase):
    def test_frame_stays_in_space_form(self):
        for k in (-1.0, 0.0, 2.0):
            wf = family_coeffs(k, 0.3, 1.0, 1)
            base = (np.eye(5)[2], base_point(3), base_normal(3))
            s_t, f_t, _ = parallel_frame_at(wf, base, 0.4)
            nk = base_normal(3) - 0.5 * k * base_point(3)
            self.assertAlmostEqual(inner(s_t, s_t), 1.0, places=12)
            self.assertAlmostEqual(inner(f_t, f_t), 0.0, places=12)
            self.assertAlmostEqual(inner(s_t, f_t), 0.0, places=12)
            self.assertAlmostEqual(inner(f_t, nk), 1.0, places=12)

    def test_infinity_boundary(self):
        wf = family_coeffs(-1.0, 0.3, 1.0, 1)
        base = (np.eye(5)[2], base_point(3), base_normal(3))
        with self.assertRaises(InfinityBoundaryError):
            parallel_frame_at(wf, base, 1.0)

    def test_curvatures_obey_affine_relation(self):
        u = np.linspace(0.2, 0.6, 5)
        for eps2 in (1, -1):
            wf = family_coeffs(0.5, 0.3, 1.2, eps2)
            for t in (0.0, 0.2, -0.1):
                k1, k2 = principal_curvatures_at(wf, u, t)
                assert_allclose(relation(wf, t, k1, k2), 0.0, atol=1e-9)

    def test_rebase_keeps_the_family(self):
        wf = family_coeffs(0.5, 0.3, 1.2, 1)
        moved = rebase(wf, 0.2)
        k1, k2 = principal_curvatures_at(wf, 0.4, 0.2)
        assert_allclose(relation(moved, 0.0, k1, k2), 0.0, atol=1e-10)
        self.assertEqual(rebase(wf, 0.0), wf)

    def test_rebase_at_cmc_surface(self):
        with self.assertRaises(DomainError):
            rebase(flagship(), 1.0)


class EllipticTests(SimpleTestCase):
    def test_sine_reparametrization(self):
        r = np.linspace(-1.0, 1.0, 41)
        er = elliptic_reparam(flagship(), 0.0, (-1.0, 1.0), r_values=r)
        assert_allclose(er.t, np.sin(r), atol=1e-9)
        assert_allclose(er.dt, np.cos(r), atol=1e-9)
        self.assertEqual(er.crossings, [])
        self.assertLess(er.ode_residual, 1e-8)
        self.assertAlmostEqual(abs(er.branch_cross_ratio), 1.0)

    def test_passes_through_branch_points(self):
        er = elliptic_reparam(flagship(), 0.0, (-2.0, 2.0), step=0.01)
        assert_allclose(er.t, np.sin(er.r), atol=1e-8)
        assert_allclose(er.crossings, [-np.pi / 2, np.pi / 2], atol=1e-6)

    def test_sinh_reparametrization(self):
        wf = family_coeffs(0.0, 0.0, 1.0, 1)
        er = elliptic_reparam(wf, 0.0, (-1.0, 1.0), step=0.05)
        assert_allclose(er.t, np.sinh(er.r), atol=1e-9)

    def test_start_value_guards(self):
        with self.assertRaises(BranchAmbiguityError):
            elliptic_reparam(flagship(), 1.0, (-1.0, 1.0), step=0.1)
        with self.assertRaises(DomainError):
            elliptic_reparam(flagship(), 2.0, (-1.0, 1.0), step=0.1)
        with self.assertRaises(InfinityBoundaryError):
            elliptic_reparam(family_coeffs(-1.0, 0.0, 0.5, 1), 1.5, (-1.0, 1.0), step=0.1)
        with self.assertRaises(UsageError):
            elliptic_reparam(flagship(), 0.0, (-1.0, 1.0))

    def test_branch_points(self):
        rho, sigma = branch_points(flagship())
        assert_allclose(sorted(rho.real), [-1.0, 1.0], atol=1e-12)
        self.assertTrue(np.all(np.isinf(sigma.real)))
        _, sigma = branch_points(family_coeffs(4.0, 0.0, 1.0, -1))
        assert_allclose(sorted(sigma.imag), [-0.5, 0.5], atol=1e-12)

    def test_degenerate_quartic(self):
        # cK and the boundary are both 1 - t^2
        with self.assertRaises(DegenerateQuarticError):
            branch_cross_ratio(family_coeffs(-1.0, 0.0, 1.0, -1))
        # cK drops to degree one while the boundary pair sits at infinity
        with self.assertRaises(DegenerateQuarticError):
            branch_cross_ratio(family_coeffs(0.0, 1.0, 1.0, -1))


class PendulumTests(SimpleTestCase):
    def setUp(self):
        self.r = np.linspace(-0.6, 0.6, 201)
        self.h = float(self.r[1] - self.r[0])

    def test_hyperbolic_fit(self):
        v = 0.3 + np.arctanh(np.sin(self.r))
        c_red, r0, v0 = fit_pendulum(v, self.h, -1)
        self.assertAlmostEqual(c_red, 0.5, places=3)
        self.assertAlmostEqual(r0, -0.5, places=3)
        self.assertAlmostEqual(v0, 0.3, places=3)
        self.assertLess(pendulum_residual(v, self.h, -1, 0.5, -0.5, 0.3), 1e-3)

    def test_trigonometric_fit(self):
        v = 0.3 + 2.0 * np.arctan(np.tanh(0.5 * self.r))
        c_red, r0, v0 = fit_pendulum(v, self.h, 1)
        self.assertAlmostEqual(c_red, -0.5, places=3)
        self.assertAlmostEqual(r0, 0.5, places=3)
        self.assertAlmostEqual(v0, 0.3, places=3)


class SineGordonTests(SimpleTestCase):
    def test_profile_solves_reduction(self):
        wf = flagship()
        grid = ParamGrid2.uniform(SPAN, SPAN, 17, 17)
        profile = sine_gordon_profile(wf, 2.0, 0.0, SPAN)
        u, du = profile(grid.t1s)
        self.assertAlmostEqual(float(u[0]), 2.0)
        self.assertAlmostEqual(float(du[0]), 0.0)
        field = np.repeat(u[:, None], 17, axis=1)
        self.assertLess(sine_gordon_residual(field, grid, wf), 5e-2)
        self.assertGreater(sine_gordon_residual(field, grid, family_coeffs(0.0, 0.0, 1.0, 1)), 1.0)

    def test_guichard_axis(self):
        self.assertEqual(guichard_axis(1), 2)
        self.assertEqual(guichard_axis(-1), 0)


class SynthesisTests(SimpleTestCase):
    def synthesize(self, shape=(8, 8, 8), r_span=(-0.6, 0.6), profile=None, wf=None):
        wf = wf or flagship()
        profile = profile or sine_gordon_profile(wf, 2.0, 0.0, SPAN)
        return synthesize_net(wf, profile, shape, SPAN, SPAN, r_span)

    def test_flagship_net(self):
        net = self.synthesize()
        r = net.axis(2)
        assert_allclose(net.t, np.sin(r), atol=1e-9)
        self.assertLess(orthogonality_residual(net), 1e-8)
        ld = lame_from_grid(net)
        self.assertLess(guichard_residual(ld, guichard_axis(-1)), 1e-8)
        assert_allclose(ld.l[2], np.broadcast_to(np.cos(r), net.shape), atol=1e-8)

    def test_guichard_angle_splits(self):
        net = self.synthesize()
        rl = reduced_lame(net)
        expected = net.meta['u'][:, None, None] + np.arctanh(np.sin(net.axis(2)))[None, None, :]
        assert_allclose(rl.w, np.broadcast_to(expected, net.shape), atol=1e-8)
        self.assertEqual(rl.v.shape, (8,))

    def test_reduced_lame_equations(self):
        net = self.synthesize(shape=(16, 16, 16))
        for residual in reduced_lame_residuals(net, -1):
            self.assertLess(residual, 1e-2)

    def test_w_splits_exactly(self):
        for n in (17, 33):
            ld = lame_from_grid(self.synthesize(shape=(n, n, n)))
            self.assertLess(max(w_split_residual(ld, -1)), 1e-6)

    def test_sphere_curvatures_in_space_form(self):
        for k in (0.0, 1.0):
            ld = lame_from_grid(self.synthesize(shape=(17, 17, 17), wf=family_coeffs(k, 0.0, 1.0, -1)))
            for i in range(3):
                assert_allclose(interior(ld.b[i, i], 2, 3), 0.5 * k, atol=2e-2)
            self.assertLess(ld.b_asymmetry(), 2e-2)
            self.assertLess(max(genlame_residuals(ld)), 5e-2)

    def test_flatness_equations_converge(self):
        wf = family_coeffs(1.0, 0.0, 1.0, -1)
        coarse = lame_from_grid(self.synthesize(shape=(17, 17, 17), wf=wf))
        fine = lame_from_grid(self.synthesize(shape=(33, 33, 33), wf=wf))
        low, high = max(genlame_residuals(coarse, margin=3)), max(genlame_residuals(fine, margin=6))
        self.assertGreater(low, 1e-9)
        self.assertGreater(convergence_order(low, high), 1.9)
        self.assertGreater(convergence_order(coarse.b_asymmetry(2), fine.b_asymmetry(4)), 1.9)

    def test_circle_families_are_channel_surfaces(self):
        for wf in (flagship(), family_coeffs(1.0, 0.0, 1.0, -1)):
            net = self.synthesize(shape=(17, 17, 17), wf=wf)
            ld = lame_from_grid(net)
            for axis in (0, 1):
                self.assertLess(channel_residuals(net, axis, ld)[2], 1e-2)
                self.assertTrue(is_channel_family(net, axis, tol=1e-2, ld=ld))

    def test_slices_satisfy_affine_relation(self):
        net = self.synthesize(shape=(16, 16, 8))
        wf = flagship()
        for j in (0, 4, 7):
            K, H = slice_curvatures(net, j)
            t = float(net.t[j])
            value = wf.cK(t) * K + 2.0 * wf.cH(t) * H + wf.c(t)
            self.assertLess(float(np.max(np.abs(value[1:-1, 1:-1]))), 5e-2)

    def test_wrong_profile(self):
        other = family_coeffs(0.0, 0.0, 1.0, 1)
        with self.assertRaises(InconsistentAnsatzError):
            self.synthesize(profile=sine_gordon_profile(other, 2.0, 0.0, SPAN))

    def test_branch_point_in_range(self):
        with self.assertRaises(SingularNetError):
            self.synthesize(r_span=(-2.0, 2.0))

    def test_grid_too_small(self):
        with self.assertRaises(UsageError):
            self.synthesize(shape=(7, 8, 8))
