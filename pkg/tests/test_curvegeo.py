import math

import numpy as np
import pytest

from affinemetrics.curvegeo import (
    CurveDef,
    affine_arclength,
    affine_frenet,
    affine_integrand,
    affine_integrand_via_euclidean,
    curve_jets,
    euclidean_frenet,
)
from affinemetrics.errors import (
    DegenerateCurve,
    DomainExit,
    EuclideanDegenerate,
    NegativeOrientation,
    NonpositiveTorsion,
    UnsupportedOrder,
)
from affinemetrics.identities import (
    integrand_routes_suite,
    random_nondegenerate_curve,
    random_sl3,
    transformed_curve,
)

SIXTH_ROOT_12 = 1.5130857494229016          # 12^(1/6)
SPIRAL_AFFINE_LENGTH = 3.0894412799902687   # int_0^1 (6 pi^4 + s^2 pi^6)^(1/6),
                                            # 10^6-panel Simpson oracle

TWISTED_CUBIC = CurveDef.from_strings("t; t^2; t^3", -2.0, 2.0)
HELIX = CurveDef.from_strings("cos(t); sin(t); t", -10.0, 10.0)
CIRCLE = CurveDef.from_strings("cos(t); sin(t); 0", -10.0, 10.0)


class TestCurveJets:
    def test_monomial_curve(self):
        jets = curve_jets(TWISTED_CUBIC, 1.0, 3)
        assert [j.coeffs for j in jets] == [
            (1.0, 1.0, 0.0, 0.0), (1.0, 2.0, 2.0, 0.0), (1.0, 3.0, 6.0, 6.0)]

    def test_circle_derivatives(self):
        jets = curve_jets(CIRCLE, 0.0, 2)
        assert [j.coeffs[1] for j in jets] == [0.0, 1.0, 0.0]
        assert [j.coeffs[2] for j in jets] == [-1.0, 0.0, 0.0]

    def test_order_seven_rejected(self):
        with pytest.raises(UnsupportedOrder):
            curve_jets(TWISTED_CUBIC, 0.0, 7)

    def test_domain_exit(self):
        with pytest.raises(DomainExit):
            curve_jets(TWISTED_CUBIC, 5.0, 3)


class TestAffineIntegrand:
    def test_twisted_cubic_constant_integrand(self):
        for t in (-1.0, 0.0, 0.5, 1.7):
            assert affine_integrand(TWISTED_CUBIC, t) == pytest.approx(
                SIXTH_ROOT_12, rel=1e-14)

    def test_planar_circle_degenerate(self):
        with pytest.raises(DegenerateCurve):
            affine_integrand(CIRCLE, 0.3)

    def test_spherical_helix_formula(self):
        curve = CurveDef.from_strings(
            "cos(8*t)*cos(t); sin(8*t)*cos(t); sin(t)", 0.0, 1.0)
        assert affine_integrand(curve, 0.0) == pytest.approx(
            34320.0 ** (1.0 / 6.0), rel=1e-12)
        for t in np.linspace(0.05, 1.0, 10):
            expected = (48.0 * math.cos(t)
                        * (43.0 + 672.0 * math.cos(t) ** 2)) ** (1.0 / 6.0)
            assert affine_integrand(curve, float(t)) == pytest.approx(
                expected, rel=1e-9)

    def test_negative_orientation_carries_determinant(self):
        mirrored = CurveDef.from_strings("-t; t^2; t^3", -2.0, 2.0)
        with pytest.raises(NegativeOrientation) as err:
            affine_integrand(mirrored, 0.5)
        assert err.value.det == pytest.approx(-12.0, rel=1e-12)
        assert affine_integrand(mirrored, 0.5, mirror=True) == pytest.approx(
            SIXTH_ROOT_12, rel=1e-14)


class TestAffineArclength:
    def test_twisted_cubic_unit_interval(self):
        res = affine_arclength(TWISTED_CUBIC, 0.0, 1.0)
        assert res.value == pytest.approx(SIXTH_ROOT_12, rel=1e-10)
        assert not res.degenerate

    def test_helical_spiral_against_simpson_oracle(self):
        spiral = CurveDef.from_strings(
            "t*cos(pi*t); t*sin(pi*t); pi*t", 0.0, 2.0)
        res = affine_arclength(spiral, 0.0, 1.0, rel_tol=1e-12, abs_tol=1e-14)
        assert res.value == pytest.approx(SPIRAL_AFFINE_LENGTH, abs=1e-9)

    def test_empty_interval(self):
        assert affine_arclength(TWISTED_CUBIC, 0.3, 0.3).value == 0.0

    def test_degenerate_curve_flagged_zero(self):
        ruling = CurveDef.from_strings("t; 2*t; 0.5", 0.0, 2.0)
        res = affine_arclength(ruling, 0.0, 1.0)
        assert res.value == pytest.approx(0.0, abs=1e-15)
        assert res.degenerate


class TestEuclideanFrenet:
    def test_circle_radius_two(self):
        circle2 = CurveDef.from_strings("2*cos(t); 2*sin(t); 0", -7.0, 7.0)
        fr = euclidean_frenet(circle2, 0.4)
        assert fr.kappa == pytest.approx(0.5, rel=1e-12)
        assert fr.tau is None          # flagged, not raised
        assert not fr.tau_defined
        assert fr.speed == pytest.approx(2.0, rel=1e-14)

    def test_helix_invariants(self):
        fr = euclidean_frenet(HELIX, 0.3)
        assert fr.kappa == pytest.approx(0.5, rel=1e-12)
        assert fr.tau == pytest.approx(0.5, rel=1e-12)
        assert fr.speed == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_straight_line_degenerate(self):
        line = CurveDef.from_strings("2*t; 0; 0", -1.0, 1.0)
        with pytest.raises(EuclideanDegenerate):
            euclidean_frenet(line, 0.0)

    def test_frame_orthonormal_right_handed(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            curve, t = random_nondegenerate_curve(rng)
            fr = euclidean_frenet(curve, t)
            frame = np.column_stack([fr.e1, fr.e2, fr.e3])
            assert np.abs(frame.T @ frame - np.eye(3)).max() < 1e-12
            assert np.linalg.det(frame) == pytest.approx(1.0, abs=1e-12)


class TestEuclideanRoute:
    def test_helix_integrand_is_one(self):
        assert affine_integrand_via_euclidean(HELIX, 0.7) == pytest.approx(
            1.0, rel=1e-13)
        assert affine_integrand(HELIX, 0.7) == pytest.approx(1.0, rel=1e-13)

    def test_matches_determinant_route(self):
        assert affine_integrand_via_euclidean(TWISTED_CUBIC, 0.0) \
            == pytest.approx(affine_integrand(TWISTED_CUBIC, 0.0), rel=1e-12)

    def test_planar_curve_nonpositive_torsion(self):
        with pytest.raises(NonpositiveTorsion):
            affine_integrand_via_euclidean(CIRCLE, 0.2)

    def test_integrand_routes_random_suite(self):
        report = integrand_routes_suite(np.random.default_rng(101), 100,
                              tolerance=1e-9)
        assert report.passed, report.line()


class TestAffineFrenet:
    def test_frame_determinant_is_one(self):
        data = affine_frenet(TWISTED_CUBIC, 1.0)
        assert data.frame_det == pytest.approx(1.0, abs=1e-9)

    def test_twisted_cubic_constant_curvatures(self):
        values = [affine_frenet(TWISTED_CUBIC, float(t))
                  for t in np.linspace(-1.0, 1.0, 10)]
        k1 = [d.kappa1 for d in values]
        k2 = [d.kappa2 for d in values]
        assert max(k1) - min(k1) < 1e-8
        assert max(k2) - min(k2) < 1e-8
        # the twisted cubic is an orbit curve with vanishing curvatures
        assert abs(k1[0]) < 1e-10 and abs(k2[0]) < 1e-10

    def test_helix_curvatures(self):
        # s = t for this helix; e3' = -alpha'' gives (kappa1, kappa2) = (0, -1)
        data = affine_frenet(HELIX, 0.4)
        assert data.kappa1 == pytest.approx(0.0, abs=1e-12)
        assert data.kappa2 == pytest.approx(-1.0, rel=1e-12)

    def test_structure_equation_residual(self):
        curve = CurveDef.from_strings(
            "t + 0.3*t^3; t^2 - 0.1*t^4; t^3 + 0.2*t^2", 0.2, 2.0)
        for t in (0.5, 1.0, 1.5):
            data = affine_frenet(curve, t)
            assert data.solve_residual < 1e-8
            assert data.frame_det == pytest.approx(1.0, abs=1e-9)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateCurve):
            affine_frenet(CIRCLE, 0.1)


class TestInvarianceProperties:
    def test_equiaffine_invariance_of_integrand_and_arclength(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            A = random_sl3(rng)
            b = rng.uniform(-1.0, 1.0, size=3)
            moved = transformed_curve(TWISTED_CUBIC, A, b)
            assert affine_integrand(moved, 0.6) == pytest.approx(
                affine_integrand(TWISTED_CUBIC, 0.6), rel=1e-9)
            got = affine_arclength(moved, 0.0, 1.0).value
            want = affine_arclength(TWISTED_CUBIC, 0.0, 1.0).value
            assert got == pytest.approx(want, rel=1e-9)

    def test_euclidean_invariance_under_rotations(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            if np.linalg.det(q) < 0:
                q[:, 0] = -q[:, 0]
            b = rng.uniform(-1.0, 1.0, size=3)
            moved = transformed_curve(HELIX, q, b)
            fr0 = euclidean_frenet(HELIX, 0.3)
            fr1 = euclidean_frenet(moved, 0.3)
            assert fr1.kappa == pytest.approx(fr0.kappa, rel=1e-10)
            assert fr1.tau == pytest.approx(fr0.tau, rel=1e-10)
            assert fr1.speed == pytest.approx(fr0.speed, rel=1e-10)

    def test_reparametrization_covariance(self):
        # phi(t) = t/2 + t^2/10 is monotone on [0, 1]
        reparam = CurveDef.from_strings(
            "(t/2 + t^2/10); (t/2 + t^2/10)^2; (t/2 + t^2/10)^3", 0.0, 1.0)
        lhs = affine_arclength(reparam, 0.0, 1.0,
                               rel_tol=1e-12, abs_tol=1e-13).value
        rhs = affine_arclength(TWISTED_CUBIC, 0.0, 0.6,
                               rel_tol=1e-12, abs_tol=1e-13).value
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_scaling_law(self):
        lam = 1.7
        scaled = CurveDef.from_strings(
            f"{lam}*t; {lam}*t^2; {lam}*t^3", -2.0, 2.0)
        assert affine_integrand(scaled, 0.4) == pytest.approx(
            math.sqrt(lam) * affine_integrand(TWISTED_CUBIC, 0.4), rel=1e-10)
