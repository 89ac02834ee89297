#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lagsurf/geometry.hpp"

using namespace lagsurf;

namespace {

const Grid g33(-1.0, 1.0, -1.0, 1.0, 33, 33);

FrameField integrate(const Potential& p, double m) {
    return integrate_frame(assemble_alpha(p, m), LaguerreElement::identity(),
                           Scheme::midpoint_exp)
        .field;
}

// round-sphere chart of radius R: every curvature sphere coincides with the
// surface, so the decoded sphere must be the middle sphere exactly
SurfaceMaps round_sphere_maps(int n, double R) {
    const Grid g(0.3, 0.9, 0.4, 1.0, n, n);
    SurfaceMaps maps;
    maps.grid = g;
    maps.sigma = Field<Vec4>(g);
    maps.f = Field<Vec3>(g);
    maps.n = Field<Vec3>(g);
    // outward normal makes the signed middle-sphere radius -R and its center
    // the origin
    const Vec4 sig = sphere_to_point(OrientedSphere{{{0.0, 0.0, 0.0}}, -R});
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double th = g.x(i), ph = g.y(j);
            const Vec3 nu{{std::sin(th) * std::cos(ph),
                           std::sin(th) * std::sin(ph), std::cos(th)}};
            maps.f.at(i, j) = R * nu;
            maps.n.at(i, j) = nu;
            maps.sigma.at(i, j) = sig;
        }
    return maps;
}

}  // namespace

TEST_CASE("induced metric is conformal and spectral shifts are isometric") {
    const Potential p = seed_radial(g33, 1.0, 1.0);
    const InvariantField inv0 = invariants_from_potential(p, 0.0);
    const FrameField F0 = integrate(p, 0.0);
    const MetricReport m0 = induced_metric(gauss_map(F0), inv0.u);
    CHECK(m0.deviation < 0.05);
    CHECK(m0.deviation > 0.0);
    // off-diagonal stays NaN on the ring, finite inside
    CHECK(std::isnan(m0.g11.at(0, 0)));
    CHECK(std::isfinite(m0.g12.at(5, 5)));

    // the member at m = 2 is isometric to the base member
    const FrameField F2 = integrate(p, 2.0);
    const InvariantField inv2 = invariants_from_potential(p, 2.0);
    const MetricReport m2 = induced_metric(gauss_map(F2), inv2.u);
    CHECK(metric_difference(m0, m2) < 0.05);
    CHECK(metric_difference(m0, m0) == 0.0);

    // deviation shrinks at second order
    const Grid g65(-1.0, 1.0, -1.0, 1.0, 65, 65);
    const Potential p65 = seed_radial(g65, 1.0, 1.0);
    const MetricReport f65 = induced_metric(
        gauss_map(integrate(p65, 0.0)),
        invariants_from_potential(p65, 0.0).u);
    const double ratio = m0.deviation / f65.deviation;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("mean curvature vector vanishes identically in the minimal case") {
    const Potential p = seed_radial(g33, 1.0, 0.0);  // k + m = 0
    const InvariantField inv = invariants_from_potential(p, 0.0);
    const FrameField F = integrate(p, 0.0);
    const MeanCurvatureReport mc = mean_curvature_vector(F, inv);
    CHECK(mc.norm_max == 0.0);
    // the numeric tangential projection agrees at stencil accuracy
    CHECK(mc.discrepancy_max < 50.0 * g33.hx() * g33.hx());
    CHECK(mc.null_max < 1e-6);
}

TEST_CASE("mean curvature vector is lightlike with analytic magnitude") {
    const Potential p = seed_radial(g33, 1.0, 1.0);
    const InvariantField inv = invariants_from_potential(p, 1.0);
    const FrameField F = integrate(p, 1.0);
    const MeanCurvatureReport mc = mean_curvature_vector(F, inv);
    CHECK(mc.norm_max > 0.1);
    CHECK(mc.discrepancy_max < 50.0 * g33.hx() * g33.hx());
    // <H,H> = -2 beta gamma with gamma at projection-error scale
    CHECK(mc.null_max < 0.01);
    CHECK(mc.null_max <= 5.0 * (1.0 + mc.norm_max) * mc.discrepancy_max);
}

TEST_CASE("conformal differentials are holomorphic constants") {
    const Potential p = seed_radial(g33, 1.0, 1.0);
    const DifferentialReport d =
        differentials(invariants_from_potential(p, 1.0));
    const double h2 = g33.hx() * g33.hx();

    // Q e^{4u} = -c/2 and P e^{2u} = 2(k+m), the latter exactly
    CHECK(std::fabs(d.Q_const - d.Q_const_expected) < 10.0 * h2);
    CHECK(d.Q_const_expected == -0.5);
    CHECK(d.Q_spread < 10.0 * h2);
    CHECK(std::fabs(d.P_const - 4.0) < 1e-12);
    CHECK(d.P_spread < 1e-12);
    CHECK(d.cr_residual < 10.0 * h2);

    // the quotient Q/P^2 = -c/(8(k+m)^2) is scale-invariant
    CHECK(d.ratio_expected == -0.03125);
    CHECK(std::fabs(d.ratio - d.ratio_expected) < 1e-3);
    CHECK(d.ratio_spread < 1e-3);

    // antiholomorphic residual converges at second order
    const Grid g65(-1.0, 1.0, -1.0, 1.0, 65, 65);
    const DifferentialReport d65 = differentials(
        invariants_from_potential(seed_radial(g65, 1.0, 1.0), 1.0));
    const double ratio = d.cr_residual / d65.cr_residual;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);

    // the minimal case has no quotient
    const DifferentialReport dm = differentials(
        invariants_from_potential(seed_radial(g33, 1.0, 0.0), 0.0));
    CHECK(std::isnan(dm.ratio));
    CHECK(std::isnan(dm.ratio_spread));
    CHECK(std::isnan(dm.ratio_expected));
}

TEST_CASE("minimal members are confined to a hyperplane of each character") {
    const double h2 = g33.hx() * g33.hx();

    // character 1: timelike normal, spacelike hyperplane
    const Potential pos = seed_radial(g33, 1.0, 0.0);
    const InvariantField ip = invariants_from_potential(pos, 0.0);
    const HyperplaneReport hp = hyperplane_detect(integrate(pos, 0.0), ip);
    CHECK(std::fabs(hp.vv - hp.vv_expected) < 10.0 * h2);
    CHECK(hp.vv_expected == -1.0);
    CHECK(hp.dv_max < 10.0 * h2);
    CHECK(hp.plane_residual < 10.0 * h2);
    CHECK(hp.cls == HyperplaneClass::spacelike);

    // character 0: the normal direction is isotropic
    const Potential nul = seed_harmonic(g33, 0.5, 0.25, 0.0);
    const InvariantField in0 = invariants_from_potential(nul, 0.0);
    const HyperplaneReport h0 = hyperplane_detect(integrate(nul, 0.0), in0);
    CHECK(std::fabs(h0.vv) < 10.0 * h2);
    CHECK(h0.cls == HyperplaneClass::isotropic);

    // character -1: spacelike normal, timelike hyperplane
    const Potential neg = seed_radial(g33, -1.0, 0.0);
    const InvariantField im = invariants_from_potential(neg, 0.0);
    const HyperplaneReport hm = hyperplane_detect(integrate(neg, 0.0), im);
    CHECK(std::fabs(hm.vv - 1.0) < 10.0 * h2);
    CHECK(hm.cls == HyperplaneClass::timelike);

    // non-minimal members are not hyperplane material
    const Potential canon = seed_radial(g33, 1.0, 1.0);
    CHECK_THROWS_AS(hyperplane_detect(integrate(canon, 0.0),
                                      invariants_from_potential(canon, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("non-minimal members are confined to hyperquadrics") {
    const double h2 = g33.hx() * g33.hx();
    const Potential p = seed_radial(g33, 1.0, 1.0);

    // m = 0: rho = -1 (hyperbolic branch)
    const InvariantField i0 = invariants_from_potential(p, 0.0);
    const FrameField F0 = integrate(p, 0.0);
    const QuadricFit q0 = quadric_detect(F0, i0);
    CHECK(q0.cls == QuadricClass::hyperbolic);
    CHECK(q0.rho_expected == -1.0);
    CHECK(std::fabs(q0.rho - q0.rho_expected) < 10.0 * h2);
    CHECK(q0.center_spread < 20.0 * h2);
    CHECK(q0.value_spread < 20.0 * h2);

    // m = 1: rho = -1/4
    const InvariantField i1 = invariants_from_potential(p, 1.0);
    const QuadricFit q1 = quadric_detect(integrate(p, 1.0), i1);
    CHECK(q1.rho_expected == -0.25);
    CHECK(std::fabs(q1.rho - q1.rho_expected) < 10.0 * h2);

    // character -1: rho = +1 (de Sitter branch)
    const Potential ds = seed_radial(g33, -1.0, 1.0);
    const InvariantField id = invariants_from_potential(ds, 0.0);
    const QuadricFit qd = quadric_detect(integrate(ds, 0.0), id);
    CHECK(qd.cls == QuadricClass::de_sitter);
    CHECK(std::fabs(qd.rho - 1.0) < 10.0 * h2);

    // character 0 with k + m != 0: the quadric degenerates to the lightcone
    const Potential lc = seed_harmonic(g33, 0.5, 0.25, 1.0);
    const InvariantField il = invariants_from_potential(lc, 0.0);
    const QuadricFit ql = quadric_detect(integrate(lc, 0.0), il);
    CHECK(ql.cls == QuadricClass::lightcone);
    CHECK(std::fabs(ql.rho) < ql.cone_tol);
    CHECK(std::isnan(ql.rho_expected) == false);  // k + m = 1 here
    CHECK(ql.rho_expected == 0.0);

    // the minimal case must be rejected (centers blow up)
    const Potential minimal = seed_radial(g33, 1.0, 0.0);
    CHECK_THROWS_AS(quadric_detect(integrate(minimal, 0.0),
                                   invariants_from_potential(minimal, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("curvature inside the quadric is constant at the spectral value") {
    const Potential p = seed_radial(g33, 1.0, 1.0);
    const double gate = 20.0 * g33.hx() * g33.hx() + 1e-3;

    for (double m : {0.0, 1.0, 2.0}) {
        const InvariantField inv = invariants_from_potential(p, m);
        const FrameField F = integrate(p, m);
        const QuadricFit fit = quadric_detect(F, inv);
        const CmcReport cmc = cmc_in_quadric(F, inv, fit);
        CHECK_FALSE(cmc.lightcone);
        CHECK(cmc.H_expected == 1.0 + m);
        CHECK(std::fabs(cmc.H_mean - cmc.H_expected) < gate);
        CHECK(cmc.H_spread < gate);
        CHECK(std::fabs(cmc.H_sign) == 1.0);
    }

    // de Sitter branch
    const Potential ds = seed_radial(g33, -1.0, 1.0);
    const InvariantField id = invariants_from_potential(ds, 0.0);
    const FrameField Fd = integrate(ds, 0.0);
    const CmcReport cd = cmc_in_quadric(Fd, id, quadric_detect(Fd, id));
    CHECK(std::fabs(cd.H_mean - 1.0) < 0.02);

    // lightcone branch reports the tangential proxy instead
    const Potential lc = seed_harmonic(g33, 0.5, 0.25, 1.0);
    const InvariantField il = invariants_from_potential(lc, 0.0);
    const FrameField Fl = integrate(lc, 0.0);
    const CmcReport cl = cmc_in_quadric(Fl, il, quadric_detect(Fl, il));
    CHECK(cl.lightcone);
    CHECK(cl.proxy_max < 10.0 * g33.hx() * g33.hx());
}

TEST_CASE("spectral table reproduces the arithmetic curvature progression") {
    const Potential p = seed_radial(g33, 1.0, 1.0);
    const std::vector<LawsonRow> rows =
        lawson_table(p, {0.0, 1.0, 2.0}, Scheme::midpoint_exp);
    REQUIRE(rows.size() == 3);

    for (std::size_t t = 0; t < rows.size(); ++t) {
        const LawsonRow& r = rows[t];
        const double mk = 1.0 + r.m;
        CHECK(r.m == static_cast<double>(t));
        CHECK(r.H_expected == mk);
        CHECK(r.kappa_expected == -mk * mk);
        CHECK(r.invariant_expected == 0.0);
        CHECK(std::fabs(r.H - r.H_expected) < 5e-3);
        CHECK(std::fabs(r.kappa - r.kappa_expected) < 0.05);
        CHECK(std::fabs(r.invariant) < 0.01);
    }
    CHECK(rows[0].metric_deviation == 0.0);
    CHECK(rows[1].metric_deviation < 0.05);
    CHECK(rows[2].metric_deviation < 0.05);
    CHECK(rows[2].metric_deviation > rows[1].metric_deviation);

    // lightcone members carry NaN curvature entries
    const Potential lc = seed_harmonic(g33, 0.5, 0.25, 1.0);
    const std::vector<LawsonRow> lrows =
        lawson_table(lc, {0.0}, Scheme::midpoint_exp);
    CHECK(std::isnan(lrows[0].kappa));
    CHECK(std::isnan(lrows[0].invariant));
    CHECK(lrows[0].H == 0.0);  // no quadric normal to measure against

    CHECK_THROWS_AS(lawson_table(p, {}, Scheme::midpoint_exp),
                    std::invalid_argument);
    const Potential nochar =
        make_custom_potential(ScalarField(g33), std::nullopt, 1.0);
    CHECK_THROWS_AS(lawson_table(nochar, {0.0}, Scheme::midpoint_exp),
                    std::invalid_argument);
}

TEST_CASE("confinement measurements are invariant under global motions") {
    const Potential p = seed_radial(g33, 1.0, 1.0);
    const InvariantField inv = invariants_from_potential(p, 0.0);
    const FrameField F = integrate(p, 0.0);
    const QuadricFit before = quadric_detect(F, inv);
    const CmcReport cbefore = cmc_in_quadric(F, inv, before);

    AlgebraElement xi;
    Mat4 S;
    S(0, 1) = 0.3;
    S(1, 0) = -0.3;
    S(2, 3) = -0.2;
    S(3, 2) = 0.2;
    S(0, 2) = 0.1;
    S(2, 0) = -0.1;
    xi.X = metric_matrix() * S;
    xi.v = Vec4{{0.2, -0.1, 0.4, 0.3}};
    const FrameField moved = left_translate(algebra_exp(xi), F);

    const QuadricFit after = quadric_detect(moved, inv);
    const CmcReport cafter = cmc_in_quadric(moved, inv, after);
    CHECK(after.cls == before.cls);
    CHECK(std::fabs(after.rho - before.rho) < 1e-8);
    CHECK(std::fabs(cafter.H_mean - cbefore.H_mean) < 1e-8);
    // the center itself moves with the motion
    CHECK(max_abs(after.O - before.O) > 0.01);
}

TEST_CASE("decoded spheres are the middle spheres of a round sphere") {
    const MiddleSphereReport r17 = middle_sphere_check(round_sphere_maps(17, 2.0));
    const MiddleSphereReport r33 = middle_sphere_check(round_sphere_maps(33, 2.0));

    CHECK(r17.parabolic_excluded == 0);
    CHECK(r17.nodes_checked == 13 * 13);
    CHECK(r33.nodes_checked == 29 * 29);
    CHECK(r17.radius_residual_max < 1e-3);
    CHECK(r33.radius_residual_max < 2.5e-4);

    // pure stencil error: both residuals drop fourfold with h/2
    const double rad_ratio = r17.radius_residual_max / r33.radius_residual_max;
    const double cen_ratio = r17.center_residual_max / r33.center_residual_max;
    CHECK(rad_ratio > 3.0);
    CHECK(rad_ratio < 5.0);
    CHECK(cen_ratio > 3.0);
    CHECK(cen_ratio < 5.0);

    // degenerate charts are rejected
    SurfaceMaps flat;
    flat.grid = Grid(0.0, 1.0, 0.0, 1.0, 7, 7);
    flat.sigma = Field<Vec4>(flat.grid);
    flat.f = Field<Vec3>(flat.grid);
    flat.n = Field<Vec3>(flat.grid);
    for (int j = 0; j < 7; ++j)
        for (int i = 0; i < 7; ++i) {
            flat.f.at(i, j) = Vec3{{flat.grid.x(i), flat.grid.x(i), 0.0}};
            flat.n.at(i, j) = Vec3{{0.0, 0.0, 1.0}};
        }
    CHECK_THROWS_AS(middle_sphere_check(flat), std::runtime_error);

    SurfaceMaps tiny;
    tiny.grid = Grid(0.0, 1.0, 0.0, 1.0, 4, 4);
    tiny.sigma = Field<Vec4>(tiny.grid);
    tiny.f = Field<Vec3>(tiny.grid);
    tiny.n = Field<Vec3>(tiny.grid);
    CHECK_THROWS_AS(middle_sphere_check(tiny), std::invalid_argument);
}
