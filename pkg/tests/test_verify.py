"""Tests for the invariance harness and the exact-solution catalog."""

import math

import numpy as np
import pytest

from jetpde.errors import ChartDomain
from jetpde.groups import GeometryTag
from jetpde.invariants import F_aff3
from jetpde.jetspace import jet_extend
from jetpde.pde import build, residual
from jetpde.verify import (
    SampleConfig,
    check_solution,
    invariance_report,
    report_to_text,
    residual_scale,
    sample_on_zero_set,
    scherk,
    sheared_quadric,
    solution_catalog,
    sphere_cap,
)

E2 = GeometryTag("euclidean", 2)
C2 = GeometryTag("conformal", 2)
A2 = GeometryTag("affine", 2)
P2 = GeometryTag("projective", 2)


class TestSamplers:
    @pytest.mark.parametrize(
        "tag,preset",
        [(E2, "minimal_surface"), (E2, "monge_ampere"), (C2, "umbilical"),
         (A2, "affine_cubic"), (P2, "projective_cubic")],
    )
    def test_soundness(self, tag, preset):
        desc = build(tag, preset)
        rng_count, found = 0, 0
        for idx in range(60):
            rng = np.random.default_rng((99, idx))
            j = sample_on_zero_set(desc, rng, 0.5)
            rng_count += 1
            if j is None:
                continue
            found += 1
            assert abs(residual(desc, j)) <= 1e-12 * residual_scale(desc, j)
        assert found >= rng_count // 3


class TestInvarianceReport:
    def test_minimal_surface_passes(self):
        desc = build(E2, "minimal_surface")
        rep = invariance_report(desc, SampleConfig(seed=7, count=60, scale=0.5, tol=1e-7))
        assert rep.passed and rep.evaluated > 0
        assert rep.max_ratio_defect <= 1e-8
        assert rep.attempted == 60
        assert rep.evaluated + sum(rep.skipped.values()) == rep.attempted

    def test_count_zero_vacuous_pass(self):
        desc = build(E2, "minimal_surface")
        rep = invariance_report(desc, SampleConfig(seed=1, count=0))
        assert rep.passed and rep.attempted == 0 and rep.max_defect == 0.0

    def test_scale_zero_nothing_skipped(self):
        desc = build(E2, "monge_ampere")
        rep = invariance_report(desc, SampleConfig(seed=3, count=40, scale=0.0, tol=1e-10))
        assert rep.skipped["not_graph"] == 0 and rep.skipped["chart_domain"] == 0
        assert rep.passed

    def test_deterministic(self):
        desc = build(C2, "umbilical")
        cfg = SampleConfig(seed=11, count=30, scale=0.3, tol=1e-6)
        a = report_to_text(invariance_report(desc, cfg))
        b = report_to_text(invariance_report(desc, cfg))
        assert a == b

    def test_translations_leave_residual_untouched(self):
        from jetpde.groups import euclidean_element, prolong
        from jetpde.verify import residual_scale, sample_on_zero_set

        desc = build(E2, "minimal_surface")
        for idx in range(25):
            rng = np.random.default_rng((21, idx))
            j = sample_on_zero_set(desc, rng, 0.5)
            if j is None:
                continue
            g = euclidean_element(np.eye(3), rng.standard_normal(3))
            moved = prolong(g, j)
            assert abs(residual(desc, moved)) <= 1e-12 * residual_scale(desc, moved)

    def test_antipode_image_is_counted_or_raised(self):
        # A half-turn in the (u, t)-plane maps the chart origin's lift e_+
        # to the excluded antipode.
        from jetpde.errors import ChartDomain
        from jetpde.groups import conformal_element, prolong
        from jetpde.jetspace import GraphJet
        from jetpde.symtensor import SymMatrix

        C = np.eye(5)
        C[1, 1] = C[4, 4] = -1.0
        g = conformal_element(C)
        j = GraphJet("sphere_stereographic", 2, 2, [0.0, 0.0], 0.0, [0.0, 0.0],
                     SymMatrix.identity(2))
        with pytest.raises(ChartDomain):
            prolong(g, j)

    def test_three_variable_equations(self):
        # trace and determinant equations in three independent variables
        E3 = GeometryTag("euclidean", 3)
        from jetpde.pde import sigma, tau

        for expr in (tau(1), sigma(3)):
            desc = build(E3, expr)
            rep = invariance_report(desc, SampleConfig(seed=13, count=60, scale=0.4,
                                                       tol=1e-7))
            assert rep.passed and rep.evaluated >= 40

    def test_chart_domain_skips_reported(self):
        # Samples based far out in the chart sit near the antipode; some
        # images leave the chart and must be tallied, not thrown.
        desc = build(C2, "umbilical")
        rep = invariance_report(desc, SampleConfig(seed=9, count=100, scale=0.3,
                                                   jet_scale=40.0, tol=1e-6))
        assert rep.skipped["chart_domain"] >= 1
        assert rep.evaluated + sum(rep.skipped.values()) == rep.attempted


class TestCatalog:
    def test_names(self):
        assert set(solution_catalog()) == {
            "plane", "paraboloid", "saddle", "cylinder_graph",
            "sphere_cap", "scherk", "sheared_quadric",
        }

    def test_scherk_closed_form(self):
        # u_y = tan(y), so at y0 = -0.2 the slope is tan(-0.2).
        g = scherk(np.array([0.3, -0.2]), 2)
        j = jet_extend(g, [0.3, -0.2], 2)
        assert np.allclose(j.grad, [-math.tan(0.3), math.tan(-0.2)])
        sec2 = lambda t: 1.0 / math.cos(t) ** 2
        assert np.isclose(j.hess[0, 0], -sec2(0.3))
        assert np.isclose(j.hess[1, 1], sec2(-0.2))
        assert j.hess[1, 0] == 0.0

    def test_scherk_domain(self):
        with pytest.raises(ChartDomain):
            scherk(np.array([1.6, 0.0]), 2)

    def test_sphere_cap_apex(self):
        g = sphere_cap(np.array([0.0, 0.0]), 2, radius=1.0)
        j = jet_extend(g, [0.0, 0.0], 2)
        assert np.allclose(j.grad, 0.0)
        assert np.allclose(j.hess.full(), np.eye(2))

    def test_sphere_cap_derivatives(self):
        # closed-form derivatives of u = c - sqrt(r^2 - |x|^2)
        base = np.array([0.3, -0.1])
        r = 1.5
        g = sphere_cap(base, 3, radius=r, center_u=0.7)
        j = jet_extend(g, base, 3)
        s = math.sqrt(r**2 - base @ base)
        assert np.isclose(j.u, 0.7 - s)
        assert np.allclose(j.grad, base / s)
        expected_hess = np.eye(2) / s + np.outer(base, base) / s**3
        assert np.allclose(j.hess.full(), expected_hess, atol=1e-12)

    def test_sheared_quadric_relation(self):
        # third jet at 0 differs from the quadric's by the symmetric tensor
        # of -2 Q(t) <t, w>
        from jetpde.invariants import sym_outer
        from jetpde.symtensor import SymMatrix

        w = np.array([0.4, -0.7])
        germ = sheared_quadric(np.zeros(2), 3, Q=np.eye(2), w=w)
        j = jet_extend(germ, np.zeros(2), 3, chart="affine")
        assert np.allclose(j.grad, 0.0, atol=1e-12)
        assert np.allclose(j.hess.full(), 2.0 * np.eye(2), atol=1e-10)
        expected = -4.0 * sym_outer(w, SymMatrix.identity(2))
        assert j.cubic.allclose(expected, tol=1e-9)


class TestCheckSolution:
    def test_scherk_minimal(self):
        desc = build(E2, "minimal_surface")
        rng = np.random.default_rng(60)
        pts = 1.2 * rng.uniform(-1, 1, size=(50, 2))
        rep = check_solution(desc, "scherk", pts)
        assert rep.evaluated == 50
        assert rep.max_defect <= 1e-10

    def test_cylinder_monge_ampere(self):
        desc = build(E2, "monge_ampere")
        rng = np.random.default_rng(61)
        pts = rng.standard_normal((30, 2))
        rep = check_solution(desc, "cylinder_graph", pts, coeffs=(0.5, -1.0, 2.0, 1.0))
        assert rep.max_defect <= 1e-12

    def test_sphere_umbilical(self):
        desc = build(C2, "umbilical")
        rng = np.random.default_rng(62)
        pts = 0.6 * rng.uniform(-1, 1, size=(30, 2))
        rep = check_solution(desc, "sphere_cap", pts, radius=1.3, center_u=0.4)
        assert rep.max_defect <= 1e-10

    def test_plane_everything_euclidean(self):
        for preset in ("minimal_surface", "monge_ampere"):
            desc = build(E2, preset)
            rep = check_solution(desc, "plane", [[0.0, 0.0], [1.0, 2.0]],
                                 value=0.3, slope=[0.1, -0.2])
            assert rep.max_defect <= 1e-14

    def test_sheared_quadric_solves_affine(self):
        desc = build(A2, "affine_cubic")
        rng = np.random.default_rng(63)
        pts = 0.2 * rng.standard_normal((20, 2))
        rep = check_solution(desc, "sheared_quadric", pts, Q=np.eye(2), w=(0.3, -0.2))
        assert rep.evaluated == 20
        assert rep.max_defect <= 1e-10

    def test_paraboloid_affine_images_zero_F(self):
        germ = sheared_quadric(np.array([0.1, -0.3]), 3, Q=np.diag([1.0, -1.0]), w=(0.2, 0.5))
        j = jet_extend(germ, [0.1, -0.3], 3, chart="affine")
        scale = (1 + j.hess.norm()) ** 3 * (1 + j.cubic.norm()) ** 2
        assert abs(F_aff3(j)) <= 1e-9 * scale
