import numpy as np
import pytest

import phimin as pm
from phimin.estimates import (PatchExceededError, WindowUnderflowError,
                              blowup_rescale, convexity_report,
                              curvature_ratio_sup, density_monotonicity,
                              geodesic_disk_area_check, ilmanen_estimate_report,
                              omori_gamma_check, rescale_profile)
from phimin.solvers import (AxisRegular, PointStart, ShootingConfig,
                            solve_rotational_profile,
                            solve_translation_profile)
from phimin.surface_geometry import GraphPatch, sample_geometry


def _flat_graph(spec, n=101, h=0.01, height=0.0):
    half = h * (n - 1) / 2
    patch = GraphPatch(domain=(-half, half, -half, half), h=h,
                       u=np.full((n, n), height))
    return sample_geometry(patch, spec), (n // 2) * n + n // 2


# -- geodesic disk area -------------------------------------------------------

def test_flat_plane_area_control(spec_zero):
    field, center = _flat_graph(spec_zero)
    rep = geodesic_disk_area_check(field, center, 0.3, spec_zero, 0.0)
    assert 0.95 <= rep.disk_area / (np.pi * 0.3**2) <= 1.05
    assert rep.passed


def test_bowl_graph_area_check(spec_linear):
    from phimin.solvers import NewtonConfig, solve_graph
    from scipy.interpolate import CubicSpline
    prof = solve_rotational_profile(
        spec_linear, ShootingConfig(start=AxisRegular(0.0), s_max=1.6, step=1e-3))
    spline = CubicSpline(prof.surface.x, prof.surface.z)
    res = solve_graph(spec_linear, (-0.5, 0.5, -0.5, 0.5), 1 / 100,
                      lambda x, y: spline(np.hypot(x, y)),
                      NewtonConfig(tol_residual=1e-10))
    field = sample_geometry(res.surface, spec_linear)
    n = res.surface.nx
    center = (n // 2) * n + n // 2
    rep = geodesic_disk_area_check(field, center, 0.3, spec_linear, -1.0)
    # 2 rho phi'(rho + mu(p)) = 0.6 < log 2 and sqrt(|Gamma|) rho < 1
    assert rep.hypothesis_ok
    assert rep.passed and rep.disk_area < rep.bound


def test_bowl_profile_pole_area_check(bowl_field, spec_linear):
    rep = geodesic_disk_area_check(bowl_field, 0, 0.3, spec_linear, -1.0)
    assert rep.hypothesis_ok and rep.passed


def test_hypothesis_gate_reports_without_asserting(bowl_field, spec_linear):
    # large slope window: 2 rho phi' >= log 2, the gate must open
    rep = geodesic_disk_area_check(bowl_field, 0, 0.5, spec_linear, -1.0)
    assert not rep.hypothesis_ok
    assert rep.disk_area > 0.0  # still recorded


def test_patch_exceeded(bowl_field, spec_linear):
    with pytest.raises(PatchExceededError):
        geodesic_disk_area_check(bowl_field, 0, 5.0, spec_linear, -1.0)


def test_translation_disk_is_flat(reaper_field, spec_linear):
    # ruled surfaces are intrinsically flat: exact pi rho^2 up to the
    # O(h^(3/2)) rim error of the chord quadrature
    rep = geodesic_disk_area_check(reaper_field, 700, 0.2, spec_linear, -1.0)
    assert rep.disk_area == pytest.approx(np.pi * 0.04, rel=5e-4)


# -- density monotonicity -----------------------------------------------------

def test_plane_density_closed_form(spec_linear):
    h = 1.0 / 256.0
    n = int(round(1.2 / h))
    s = h * np.arange(n + 1)
    disk = pm.ProfileCurve(s=s, x=s.copy(), z=np.zeros(n + 1),
                           theta=np.zeros(n + 1), kind="Rotational", step=h)
    field = sample_geometry(disk, spec_linear)
    radii = np.linspace(0.05, 0.5, 10)
    rep = density_monotonicity(field, 0, radii, spec_linear, 0.9)
    assert rep.monotone
    assert np.all(np.abs(rep.o_values - radii / 4.0) <= rep.tolerance + 1e-12)


def test_catenoid_density_monotone(catenoid_two_sided, spec_zero, spec_linear):
    field = sample_geometry(catenoid_two_sided, spec_zero)
    neck = len(catenoid_two_sided.s) // 2
    radii = np.linspace(0.04, 0.6, 24)
    rep = density_monotonicity(field, neck, radii, spec_linear, 0.9)
    assert rep.monotone


def test_bowl_density_monotone(bowl_field, spec_linear):
    radii = np.linspace(0.04, 0.6, 24)
    rep = density_monotonicity(bowl_field, 0, radii, spec_linear, 0.9)
    assert rep.monotone


def test_single_radius_trivially_monotone(bowl_field, spec_linear):
    rep = density_monotonicity(bowl_field, 0, [0.2], spec_linear, 0.9)
    assert rep.monotone


def test_density_radius_window_enforced(bowl_field, spec_linear):
    with pytest.raises(ValueError):
        density_monotonicity(bowl_field, 0, [0.5, 1.5], spec_linear, 0.9)


def test_density_weighted_variant_recorded(bowl_field, spec_linear):
    rep = density_monotonicity(bowl_field, 0, [0.1, 0.2], spec_linear, 0.9,
                               weighted_variant=True)
    assert rep.o_values_weighted is not None
    assert np.all(rep.o_values_weighted > 0.0)


# -- curvature ratio ----------------------------------------------------------

def test_vertical_plane_ratio_zero(vertical_plane_profile, spec_linear):
    field = sample_geometry(vertical_plane_profile, spec_linear)
    assert curvature_ratio_sup(field, spec_linear) <= 1e-12


def test_grim_reaper_ratio_is_one(reaper_field, spec_linear):
    sup = curvature_ratio_sup(field=reaper_field, spec=spec_linear)
    assert sup == pytest.approx(1.0, abs=2e-3)


def test_ratio_requires_positive_slope(bowl_field, spec_zero):
    with pytest.raises(ValueError):
        curvature_ratio_sup(bowl_field, spec_zero)


def test_ratio_invariant_under_horizontal_translation(spec_linear):
    rng = np.random.default_rng(2)
    u = 1.0 + 0.02 * rng.standard_normal((17, 17))
    f1 = sample_geometry(GraphPatch(domain=(0, 1, 0, 1), h=1 / 16, u=u), spec_linear)
    f2 = sample_geometry(GraphPatch(domain=(7, 8, -3, -2), h=1 / 16, u=u.copy()),
                         spec_linear)
    assert curvature_ratio_sup(f1, spec_linear) == curvature_ratio_sup(f2, spec_linear)


def test_ratio_stabilises_under_window_and_grid(spec_linear, spec_quadratic):
    for spec in (spec_linear, spec_quadratic):
        sups = []
        for s_max, step in ((2.0, 2e-3), (4.0, 2e-3), (2.0, 1e-3)):
            sol = solve_rotational_profile(
                spec, ShootingConfig(start=AxisRegular(0.0), s_max=s_max, step=step))
            sups.append(curvature_ratio_sup(sample_geometry(sol.surface, spec), spec))
        base = sups[0]
        assert abs(sups[1] - base) <= 0.05 * base
        assert abs(sups[2] - base) <= 0.05 * base


# -- convexity ----------------------------------------------------------------

def _tol_for(field):
    return 10.0 * field.grid_h**2 * max(float(field.norm_s2().max()), 1.0)


def test_bowl_convex(bowl_field, spec_linear):
    rep = convexity_report(bowl_field, spec_linear, _tol_for(bowl_field))
    assert rep.verdict == "ConvexWithinTol"
    assert rep.min_K >= -_tol_for(bowl_field)
    assert rep.theta_sup < 0.0  # larger curvature strictly negative
    assert rep.lambda_K_inf == 0.0


def test_reaper_flat_boundary_case(reaper_field, spec_linear):
    rep = convexity_report(reaper_field, spec_linear, _tol_for(reaper_field))
    assert rep.verdict == "ConvexWithinTol"
    assert rep.min_K == pytest.approx(0.0, abs=1e-12)
    assert rep.min_k2 == 0.0


def test_catenoid_hypotheses_fail(catenoid_field, spec_zero):
    rep = convexity_report(catenoid_field, spec_zero, _tol_for(catenoid_field))
    assert rep.verdict == "HypothesesFail"
    assert not rep.hypotheses["c1"]
    assert rep.min_K < 0.0


def test_quadratic_bowl_convex(quad_bowl, spec_quadratic):
    field = sample_geometry(quad_bowl.surface, spec_quadratic)
    rep = convexity_report(field, spec_quadratic, _tol_for(field))
    assert rep.hypotheses["d3_nonpositive"]
    assert rep.verdict == "ConvexWithinTol"


# -- conformal curvature-distance report -------------------------------------

def test_vertical_strip_conformal_curvature_zero(spec_linear):
    n = 200
    s = 1e-2 * np.arange(n + 1)
    strip = pm.ProfileCurve(s=s, x=np.ones(n + 1), z=s + 1.0,
                            theta=np.full(n + 1, np.pi / 2),
                            kind="TranslationInvariant", step=1e-2)
    field = sample_geometry(strip, spec_linear)
    rep = ilmanen_estimate_report(field, spec_linear, [0, n])
    assert rep.sup_conformal_curvature <= 1e-12
    assert rep.sup_curvature_times_reach <= 1e-12


def test_flat_patch_with_zero_weight(spec_zero):
    field, _ = _flat_graph(spec_zero, n=33, h=0.05)
    boundary = np.where(~field.interior_mask(1))[0]
    rep = ilmanen_estimate_report(field, spec_zero, boundary)
    assert rep.sup_conformal_curvature <= 1e-12


def test_bowl_report_stable_under_refinement(spec_linear):
    sups = []
    for step in (2e-3, 1e-3):
        sol = solve_rotational_profile(
            spec_linear, ShootingConfig(start=AxisRegular(0.0), s_max=2.0, step=step))
        field = sample_geometry(sol.surface, spec_linear)
        rep = ilmanen_estimate_report(field, spec_linear, [0, field.n_samples - 1])
        sups.append(rep.sup_curvature_times_reach)
    assert sups[0] > 0.0
    assert abs(sups[1] - sups[0]) <= 0.03 * sups[0]


# -- blow-up ------------------------------------------------------------------

@pytest.fixture(scope="module")
def tall_bowl(spec_linear):
    cfg = ShootingConfig(start=AxisRegular(0.0), s_max=20.0, step=2e-3)
    return solve_rotational_profile(spec_linear, cfg)


def test_bowl_plane_blowup(tall_bowl, spec_linear):
    field = sample_geometry(tall_bowl.surface, spec_linear)
    heights = [4.0, 8.0, 16.0]
    bps = [int(np.argmin(np.abs(field.mu - h))) for h in heights]
    rep = blowup_rescale(tall_bowl, bps, heights, spec_linear, "Plane")
    c2 = [st.c2_distance for st in rep.stages]
    assert c2[0] > c2[1] > c2[2]
    assert c2[-1] <= 0.05
    ratios = [st.slope_ratio for st in rep.stages]
    assert ratios == pytest.approx([1 / 4, 1 / 8, 1 / 16], rel=0.02)


def test_identity_rescale_matches_bowl_model(tall_bowl, spec_linear):
    rep = blowup_rescale(tall_bowl, [0], [1.0], spec_linear, "Bowl")
    assert rep.hausdorff_distance <= 1e-8
    assert rep.c2_distance <= 1e-6


def test_quadratic_tips_approach_unit_bowl(spec_quadratic):
    # tip rescalings of solves at increasing heights, scale = slope there
    sources, bps, scales = [], [], []
    for z0 in (3.0, 7.0, 15.0):
        lam = pm.eval_potential(spec_quadratic, z0).d1
        cfg = ShootingConfig(start=AxisRegular(z0), s_max=2.5 / lam, step=2e-3 / lam)
        sources.append(solve_rotational_profile(spec_quadratic, cfg))
        bps.append(0)
        scales.append(lam)
    rep = blowup_rescale(sources, bps, scales, spec_quadratic, "Bowl")
    c2 = [st.c2_distance for st in rep.stages]
    assert rep.slope_constant == pytest.approx(1.0)
    assert c2[0] > c2[-1]
    assert c2[-1] <= 0.05


def test_rescaling_covariance_exact(tall_bowl, spec_linear):
    lam = 4.0
    field = sample_geometry(tall_bowl.surface, spec_linear)
    rescaled = rescale_profile(tall_bowl.surface, lam, 0)
    f2 = sample_geometry(rescaled, pm.PotentialSpec.linear(1.0 / lam))
    assert np.abs(f2.k1 - field.k1 / lam).max() <= 1e-12
    assert np.abs(f2.k2 - field.k2 / lam).max() <= 1e-12
    assert np.abs(f2.H - field.H / lam).max() <= 1e-12
    assert np.abs(f2.K - field.K / lam**2).max() <= 1e-12


def test_window_underflow(tall_bowl, spec_linear):
    field = sample_geometry(tall_bowl.surface, spec_linear)
    last = field.n_samples - 1
    with pytest.raises(WindowUnderflowError):
        blowup_rescale(tall_bowl, [last], [2.0], spec_linear, "Plane")


def test_scales_must_increase(tall_bowl, spec_linear):
    with pytest.raises(ValueError):
        blowup_rescale(tall_bowl, [0, 0], [2.0, 1.0], spec_linear, "Plane")


# -- drift maximum-principle test function -----------------------------------

def test_omori_bounds_on_flat_plane(spec_zero):
    field, _ = _flat_graph(spec_zero, n=81, h=0.1, height=1.0)
    grad_rep, lap_rep = omori_gamma_check(field, spec_zero)
    assert grad_rep.max_abs_residual == 0.0
    assert lap_rep.max_abs_residual == 0.0


def test_omori_bounds_on_bowl_patch(spec_linear):
    cfg = ShootingConfig(start=AxisRegular(5.0), s_max=3.0, step=1e-3)
    sol = solve_rotational_profile(spec_linear, cfg)
    field = sample_geometry(sol.surface, spec_linear)
    grad_rep, lap_rep = omori_gamma_check(field, spec_linear)
    assert grad_rep.max_abs_residual == 0.0
    assert lap_rep.max_abs_residual == 0.0


def test_omori_gradient_bound_is_generic(reaper_field, spec_linear):
    # |grad gamma| <= 2/|p| <= 2 wherever |p| >= 1, any surface
    shifted = pm.ProfileCurve(
        s=reaper_field.source.s, x=reaper_field.source.x,
        z=reaper_field.source.z + 3.0, theta=reaper_field.source.theta,
        kind="TranslationInvariant", step=reaper_field.source.step)
    field = sample_geometry(shifted, spec_linear)
    grad_rep, _ = omori_gamma_check(field, spec_linear, min_radius=1.0)
    assert grad_rep.max_abs_residual == 0.0


def test_omori_origin_proximity(spec_zero):
    field, _ = _flat_graph(spec_zero, n=21, h=0.01, height=0.0)
    with pytest.raises(pm.estimates.OriginProximityError):
        omori_gamma_check(field, spec_zero, min_radius=5.0)
