#pragma once

// Geometric analysis downstream of an integrated frame field: induced metric
// of the sphere-congruence map sigma, mean curvature vector, the conformal
// differentials with holomorphicity residuals, hyperplane and hyperquadric
// confinement, constant-mean-curvature measurement inside the quadric, the
// spectral (Lawson) tables, and Euclidean middle-sphere cross-checks.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cyclographic.hpp"
#include "frames.hpp"
#include "grid.hpp"
#include "minkowski.hpp"

namespace lagsurf {

inline Field<Vec4> gauss_map(const FrameField& F) {
    Field<Vec4> out(F.grid);
    for (std::size_t t = 0; t < F.A.size(); ++t) out.v[t] = F.A[t].translation;
    return out;
}

struct SurfaceMaps {
    Grid grid;
    Field<Vec4> sigma;
    Field<Vec3> f;
    Field<Vec3> n;
};

inline SurfaceMaps surface_maps(const FrameField& F,
                                const LegendreRealization& lift) {
    return {F.grid, gauss_map(F), lift.f, lift.n};
}

// ---------------------------------------------------------------------------
// induced metric

struct MetricReport {
    ScalarField g11, g12, g22;  // Gram of central-difference tangents
    double deviation = 0.0;     // max |Gram - e^{2u} I| over interior
};

inline MetricReport induced_metric(const Field<Vec4>& sigma,
                                   const ScalarField& u) {
    const Grid& g = sigma.grid;
    const Field<Vec4> sx = field_dx(sigma), sy = field_dy(sigma);
    MetricReport out;
    out.g11 = ScalarField(g);
    out.g12 = ScalarField(g);
    out.g22 = ScalarField(g);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t t = 0; t < g.size(); ++t)
        out.g11.v[t] = out.g12.v[t] = out.g22.v[t] = nan;
    for_interior(sigma, 1, [&](int i, int j) {
        out.g11.at(i, j) = lorentz_dot(sx.at(i, j), sx.at(i, j));
        out.g12.at(i, j) = lorentz_dot(sx.at(i, j), sy.at(i, j));
        out.g22.at(i, j) = lorentz_dot(sy.at(i, j), sy.at(i, j));
    });
    // Statistics stay two nodes in: difference quotients at margin 1 straddle
    // boundary nodes whose one-sided stencils carry a different truncation
    // constant, which costs an order of accuracy across that seam.
    for_interior(sigma, 2, [&](int i, int j) {
        const double e2u = std::exp(2.0 * u.at(i, j));
        const double dev = std::max(
            {std::fabs(out.g11.at(i, j) - e2u), std::fabs(out.g12.at(i, j)),
             std::fabs(out.g22.at(i, j) - e2u)});
        out.deviation = std::max(out.deviation, dev);
    });
    return out;
}

// max entrywise difference of two induced metrics (spectral-shift isometry)
inline double metric_difference(const MetricReport& a, const MetricReport& b) {
    double r = 0.0;
    for_interior(a.g11, 2, [&](int i, int j) {
        r = std::max(r, std::fabs(a.g11.at(i, j) - b.g11.at(i, j)));
        r = std::max(r, std::fabs(a.g12.at(i, j) - b.g12.at(i, j)));
        r = std::max(r, std::fabs(a.g22.at(i, j) - b.g22.at(i, j)));
    });
    return r;
}

// ---------------------------------------------------------------------------
// mean curvature vector

// Normal-bundle coefficients: the frame's a1, a4 are null with <a1,a4> = -1,
// so w = beta*a1 + gamma*a4 has beta = -<w,a4>, gamma = -<w,a1>.
struct MeanCurvatureReport {
    Field<Vec4> H;                 // analytic (p1+p3)/2 * a1
    double discrepancy_max = 0.0;  // vs numeric Laplace-Beltrami projection
    double null_max = 0.0;         // max |<H,H>| from numeric coefficients
    double norm_max = 0.0;         // max Euclidean norm of analytic H
};

inline MeanCurvatureReport mean_curvature_vector(const FrameField& F,
                                                 const InvariantField& inv) {
    const Grid& g = F.grid;
    MeanCurvatureReport out;
    out.H = Field<Vec4>(g);
    for (std::size_t t = 0; t < g.size(); ++t) {
        const Vec4 a1 = F.A[t].linear.column(0);
        out.H.v[t] = (0.5 * (inv.p1.v[t] + inv.p3.v[t])) * a1;
        out.norm_max = std::max(out.norm_max, std::sqrt(euclid_norm2(out.H.v[t])));
    }
    const Field<Vec4> sigma = gauss_map(F);
    const Field<Vec4> sxx = field_dxx(sigma), syy = field_dyy(sigma);
    // Margin 2: second differences must not straddle boundary nodes, whose
    // one-sided stencils have a different truncation constant (the 1/h^2
    // amplifies that seam to O(1)).
    for_interior(sigma, 2, [&](int i, int j) {
        const double e2u = std::exp(2.0 * inv.u.at(i, j));
        const Vec4 lb = (1.0 / e2u) * (sxx.at(i, j) + syy.at(i, j));
        const Vec4 a1 = F.at(i, j).linear.column(0);
        const Vec4 a4 = F.at(i, j).linear.column(3);
        const double beta = -0.5 * lorentz_dot(lb, a4);   // a1 coefficient of H
        const double gamma = -0.5 * lorentz_dot(lb, a1);  // a4 coefficient of H
        const double w = 0.5 * (inv.p1.at(i, j) + inv.p3.at(i, j));
        out.discrepancy_max = std::max(
            out.discrepancy_max,
            std::max(std::fabs(beta - w), std::fabs(gamma)));
        out.null_max = std::max(out.null_max, std::fabs(-2.0 * beta * gamma));
    });
    return out;
}

// ---------------------------------------------------------------------------
// conformal differentials

struct DifferentialReport {
    ScalarField Q, P;    // Q = J (p2 = 0 pipeline), P = p1 + p3
    ScalarField Q4, P2;  // Q e^{4u} and P e^{2u}
    double Q_const = 0.0, Q_spread = 0.0;
    double P_const = 0.0, P_spread = 0.0;
    double cr_residual = 0.0;  // max |d/dzbar| of both rescaled fields
    double ratio = 0.0, ratio_spread = 0.0;  // Q/P^2 (NaN when k+m = 0)
    double Q_const_expected = 0.0, ratio_expected = 0.0;
};

inline DifferentialReport differentials(const InvariantField& inv) {
    const Grid& g = inv.grid;
    DifferentialReport out;
    out.Q = inv.J;
    out.P = ScalarField(g);
    out.Q4 = ScalarField(g);
    out.P2 = ScalarField(g);
    for (std::size_t t = 0; t < g.size(); ++t) {
        out.P.v[t] = inv.p1.v[t] + inv.p3.v[t];
        const double e2u = inv.expu.v[t] * inv.expu.v[t];
        out.Q4.v[t] = out.Q.v[t] * e2u * e2u;
        out.P2.v[t] = out.P.v[t] * e2u;
    }
    out.Q_const = mean_interior(out.Q4, 2);
    out.P_const = mean_interior(out.P2, 2);
    for_interior(out.Q4, 2, [&](int i, int j) {
        out.Q_spread =
            std::max(out.Q_spread, std::fabs(out.Q4.at(i, j) - out.Q_const));
        out.P_spread =
            std::max(out.P_spread, std::fabs(out.P2.at(i, j) - out.P_const));
    });

    // d/dzbar = (d/dx + i d/dy)/2 on a real field: modulus hypot(Fx,Fy)/2.
    // Margin 2: the quotient at margin 1 reads one-sided boundary values.
    const ScalarField q4x = field_dx(out.Q4), q4y = field_dy(out.Q4);
    const ScalarField p2x = field_dx(out.P2), p2y = field_dy(out.P2);
    for_interior(out.Q4, 2, [&](int i, int j) {
        out.cr_residual = std::max(
            out.cr_residual,
            0.5 * std::hypot(q4x.at(i, j), q4y.at(i, j)));
        out.cr_residual = std::max(
            out.cr_residual,
            0.5 * std::hypot(p2x.at(i, j), p2y.at(i, j)));
    });

    out.Q_const_expected = -0.5 * inv.c;
    const double mk = inv.k + inv.m;
    if (mk != 0.0) {
        double s = 0.0;
        std::size_t cnt = 0;
        ScalarField ratio(g);
        for_interior(ratio, 2, [&](int i, int j) {
            ratio.at(i, j) = out.Q.at(i, j) /
                             (out.P.at(i, j) * out.P.at(i, j));
            s += ratio.at(i, j);
            ++cnt;
        });
        out.ratio = s / static_cast<double>(cnt);
        for_interior(ratio, 2, [&](int i, int j) {
            out.ratio_spread = std::max(
                out.ratio_spread, std::fabs(ratio.at(i, j) - out.ratio));
        });
        out.ratio_expected = -inv.c / (8.0 * mk * mk);
    } else {
        out.ratio = std::numeric_limits<double>::quiet_NaN();
        out.ratio_spread = std::numeric_limits<double>::quiet_NaN();
        out.ratio_expected = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

// ---------------------------------------------------------------------------
// hyperplane confinement (the L-minimal branch, p1 + p3 = 0)

struct HyperplaneReport {
    Vec4 v_mean;
    Vec4 O;
    double vv = 0.0;              // <v_mean, v_mean>
    double vv_expected = 0.0;     // -c
    double dv_max = 0.0;          // max derivative component of the v field
    double plane_residual = 0.0;  // max |<sigma - O, v_mean>|
    HyperplaneClass cls = HyperplaneClass::spacelike;
};

inline HyperplaneReport hyperplane_detect(const FrameField& F,
                                          const InvariantField& inv) {
    if (std::fabs(inv.k + inv.m) > 1e-9)
        throw std::invalid_argument(
            "hyperplane_detect: needs the L-minimal case k + m = 0");
    const Grid& g = F.grid;
    Field<Vec4> v(g);
    for (std::size_t t = 0; t < g.size(); ++t) {
        const double e2u = inv.expu.v[t] * inv.expu.v[t];
        const Vec4 a1 = F.A[t].linear.column(0);
        const Vec4 a4 = F.A[t].linear.column(3);
        v.v[t] = e2u * ((-inv.p1.v[t]) * a1 + a4);
    }
    HyperplaneReport out;
    Vec4 mean;
    std::size_t cnt = 0;
    for_interior(v, 2, [&](int i, int j) {
        mean = mean + v.at(i, j);
        ++cnt;
    });
    mean = (1.0 / static_cast<double>(cnt)) * mean;
    out.v_mean = mean;
    out.vv = lorentz_norm2(mean);
    out.vv_expected = -inv.c;

    // Margin 2: the v field at boundary nodes rests on one-sided stencils.
    const Field<Vec4> vx = field_dx(v), vy = field_dy(v);
    for_interior(v, 2, [&](int i, int j) {
        out.dv_max = std::max(out.dv_max,
                              std::max(max_abs(vx.at(i, j)), max_abs(vy.at(i, j))));
    });

    const Field<Vec4> sigma = gauss_map(F);
    out.O = sigma.at(2, 2);
    for_interior(sigma, 2, [&](int i, int j) {
        out.plane_residual =
            std::max(out.plane_residual,
                     std::fabs(lorentz_dot(sigma.at(i, j) - out.O, mean)));
    });

    const double h = std::max(g.hx(), g.hy());
    out.cls = classify_hyperplane(mean, std::max(10.0 * h * h, 1e-6));
    return out;
}

// ---------------------------------------------------------------------------
// hyperquadric confinement

struct QuadricFit {
    Vec4 O;
    double rho = 0.0;
    double center_spread = 0.0;
    double value_spread = 0.0;
    QuadricClass cls = QuadricClass::lightcone;
    double rho_expected = 0.0;  // -c/(m+k)^2
    double scale = 0.0;         // mean Euclidean |sigma - O|^2
    double cone_tol = 0.0;      // |rho| below this classifies as lightcone
};

// Per-node center O = sigma - l1*a1 - l4*a4 with l1 = (p3-p1)/(p1+p3),
// l4 = 2/(p1+p3); constancy of O and of <sigma-O, sigma-O> is the quadric
// confinement being certified.
inline QuadricFit quadric_detect(const FrameField& F,
                                 const InvariantField& inv) {
    const Grid& g = F.grid;
    double pmin = std::numeric_limits<double>::infinity(), pmax = 0.0;
    for_interior(inv.p1, 2, [&](int i, int j) {
        const double p = std::fabs(inv.p1.at(i, j) + inv.p3.at(i, j));
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
    });
    if (pmin < 1e-6 * (1.0 + pmax))
        throw std::invalid_argument(
            "quadric_detect: p1 + p3 near zero (L-minimal); use "
            "hyperplane_detect");

    const Field<Vec4> sigma = gauss_map(F);
    Field<Vec4> centers(g);
    Vec4 O;
    std::size_t cnt = 0;
    for_interior(sigma, 2, [&](int i, int j) {
        const double P = inv.p1.at(i, j) + inv.p3.at(i, j);
        const double l1 = (inv.p3.at(i, j) - inv.p1.at(i, j)) / P;
        const double l4 = 2.0 / P;
        const Vec4 a1 = F.at(i, j).linear.column(0);
        const Vec4 a4 = F.at(i, j).linear.column(3);
        centers.at(i, j) = sigma.at(i, j) - l1 * a1 - l4 * a4;
        O = O + centers.at(i, j);
        ++cnt;
    });
    O = (1.0 / static_cast<double>(cnt)) * O;

    QuadricFit out;
    out.O = O;
    double rho_sum = 0.0, scale_sum = 0.0;
    for_interior(sigma, 2, [&](int i, int j) {
        out.center_spread =
            std::max(out.center_spread, max_abs(centers.at(i, j) - O));
        const Vec4 d = sigma.at(i, j) - O;
        rho_sum += lorentz_norm2(d);
        scale_sum += euclid_norm2(d);
    });
    out.rho = rho_sum / static_cast<double>(cnt);
    const double scale = scale_sum / static_cast<double>(cnt);
    for_interior(sigma, 2, [&](int i, int j) {
        out.value_spread =
            std::max(out.value_spread,
                     std::fabs(lorentz_norm2(sigma.at(i, j) - O) - out.rho));
    });

    // Lightcone decision: rho is indistinguishable from zero when it sits
    // inside the observed node-to-node dispersion of <sigma-O, sigma-O>,
    // with an h^2 floor for the case where the dispersion itself degenerates.
    const double h = std::max(g.hx(), g.hy());
    out.scale = scale;
    out.cone_tol =
        std::max({10.0 * out.value_spread, 10.0 * h * h, 1e-6});
    out.cls = classify_quadric(out.rho, out.cone_tol);
    const double mk = inv.k + inv.m;
    out.rho_expected = mk != 0.0 ? -inv.c / (mk * mk)
                                 : std::numeric_limits<double>::quiet_NaN();
    return out;
}

// ---------------------------------------------------------------------------
// mean curvature inside the quadric

struct CmcReport {
    double H_mean = 0.0;    // signed mean of per-node H
    double H_spread = 0.0;  // max |H - H_mean|
    double H_sign = 0.0;    // sign of <H_vec, nu> at the center node
    double H_expected = 0.0;  // (m+k)/sqrt|c|
    bool lightcone = false;
    double proxy_max = 0.0;  // lightcone branch: tangential mean curvature
};

// Unit normal within the quadric: nu in span{a1,a4} orthogonal to sigma-O.
// With beta = -<sigma-O, a4>, gamma = -<sigma-O, a1>, the direction is
// beta*a1 - gamma*a4, of square 2*beta*gamma = -<sigma-O,sigma-O>; it is
// spacelike in the hyperbolic branch, timelike in the de Sitter branch.
inline CmcReport cmc_in_quadric(const FrameField& F, const InvariantField& inv,
                                const QuadricFit& fit) {
    const Grid& g = F.grid;
    const Field<Vec4> sigma = gauss_map(F);
    CmcReport out;
    out.H_expected = inv.c != 0.0
                         ? (inv.k + inv.m) / std::sqrt(std::fabs(inv.c))
                         : 0.0;

    if (fit.cls == QuadricClass::lightcone) {
        out.lightcone = true;
        const Field<Vec4> sx = field_dx(sigma), sy = field_dy(sigma);
        const Field<Vec4> sxx = field_dxx(sigma), syy = field_dyy(sigma);
        for_interior(sigma, 2, [&](int i, int j) {
            // Lorentz-orthonormalize the (spacelike) tangents
            Vec4 t1 = sx.at(i, j);
            t1 = (1.0 / std::sqrt(lorentz_norm2(t1))) * t1;
            Vec4 t2 = sy.at(i, j) - lorentz_dot(sy.at(i, j), t1) * t1;
            t2 = (1.0 / std::sqrt(lorentz_norm2(t2))) * t2;
            const double e2u = std::exp(2.0 * inv.u.at(i, j));
            const Vec4 lb = (0.5 / e2u) * (sxx.at(i, j) + syy.at(i, j));
            const double c1 = lorentz_dot(lb, t1), c2 = lorentz_dot(lb, t2);
            out.proxy_max =
                std::max(out.proxy_max, std::sqrt(c1 * c1 + c2 * c2));
        });
        return out;
    }

    double sum = 0.0;
    std::size_t cnt = 0;
    ScalarField Hf(g);
    const Field<Vec4> sxx = field_dxx(sigma), syy = field_dyy(sigma);
    // Margin 2: second differences one node from the edge straddle boundary
    // columns whose one-sided stencils carry a different error constant, and
    // the 1/h^2 turns that mismatch into an O(1) curvature artifact.
    for_interior(sigma, 2, [&](int i, int j) {
        const Vec4 d = sigma.at(i, j) - fit.O;
        const Vec4 a1 = F.at(i, j).linear.column(0);
        const Vec4 a4 = F.at(i, j).linear.column(3);
        const double beta = -lorentz_dot(d, a4);
        const double gamma = -lorentz_dot(d, a1);
        const double bg = beta * gamma;
        if (!(std::fabs(bg) > 1e-14))
            throw std::runtime_error(
                "cmc_in_quadric: degenerate normal span at a node");
        const double s = 1.0 / std::sqrt(2.0 * std::fabs(bg));
        const Vec4 nu = s * (beta * a1 - gamma * a4);
        const double e2u = std::exp(2.0 * inv.u.at(i, j));
        const double II_trace =
            lorentz_dot(sxx.at(i, j), nu) + lorentz_dot(syy.at(i, j), nu);
        Hf.at(i, j) = 0.5 * II_trace / e2u;
        sum += Hf.at(i, j);
        ++cnt;
    });
    out.H_mean = sum / static_cast<double>(cnt);
    for_interior(sigma, 2, [&](int i, int j) {
        out.H_spread = std::max(out.H_spread,
                                std::fabs(Hf.at(i, j) - out.H_mean));
    });

    // orientation report at the central node
    {
        const int i = g.nx / 2, j = g.ny / 2;
        const Vec4 d = sigma.at(i, j) - fit.O;
        const Vec4 a1 = F.at(i, j).linear.column(0);
        const Vec4 a4 = F.at(i, j).linear.column(3);
        const double beta = -lorentz_dot(d, a4);
        const double gamma = -lorentz_dot(d, a1);
        const double s = 1.0 / std::sqrt(2.0 * std::fabs(beta * gamma));
        const Vec4 nu = s * (beta * a1 - gamma * a4);
        const Vec4 Hvec =
            (0.5 * (inv.p1.at(i, j) + inv.p3.at(i, j))) * a1;
        out.H_sign = lorentz_dot(Hvec, nu) >= 0.0 ? 1.0 : -1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// spectral table

struct LawsonRow {
    double m = 0.0;
    double H = 0.0;
    double kappa = 0.0;
    double invariant = 0.0;  // kappa + H^2
    double metric_deviation = 0.0;  // vs the first m in the list
    double H_expected = 0.0;
    double kappa_expected = 0.0;
    double invariant_expected = 0.0;
};

inline std::vector<LawsonRow> lawson_table(const Potential& p,
                                           const std::vector<double>& m_list,
                                           Scheme scheme) {
    if (m_list.empty())
        throw std::invalid_argument("lawson_table: empty m list");
    if (!p.c) throw std::invalid_argument("lawson_table: potential not special");
    const double c = *p.c;
    const double threshold =
        std::max(1e-3, 100.0 * flatness_baseline(p.u.grid));
    std::vector<LawsonRow> rows;
    MetricReport metric0;
    bool have_metric0 = false;
    for (double m : m_list) {
        const InvariantField inv = invariants_from_potential(p, m);
        const MaurerCartanField alpha = assemble_alpha(inv);
        const IntegrationResult ir = integrate_frame(
            alpha, LaguerreElement::identity(), scheme, threshold);
        const Field<Vec4> sigma = gauss_map(ir.field);
        const MetricReport metric = induced_metric(sigma, inv.u);
        if (!have_metric0) {
            metric0 = metric;
            have_metric0 = true;
        }
        const QuadricFit fit = quadric_detect(ir.field, inv);
        const CmcReport cmc = cmc_in_quadric(ir.field, inv, fit);

        LawsonRow row;
        row.m = m;
        row.H = std::fabs(cmc.H_mean);
        row.kappa = fit.cls == QuadricClass::lightcone
                        ? std::numeric_limits<double>::quiet_NaN()
                        : 1.0 / fit.rho;
        row.invariant = row.kappa + row.H * row.H;
        row.metric_deviation = metric_difference(metric0, metric);
        const double mk = p.k + m;
        row.H_expected = mk / std::sqrt(std::fabs(c));
        row.kappa_expected = -mk * mk / c;
        row.invariant_expected = c > 0.0 ? 0.0 : -2.0 * mk * mk / c;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Euclidean middle-sphere cross-check

struct MiddleSphereReport {
    double radius_residual_max = 0.0;
    double center_residual_max = 0.0;
    int parabolic_excluded = 0;
    int nodes_checked = 0;
};

// The decoded sphere at each node must be the middle sphere of the enveloped
// surface: radius H_euc/K_euc, center f + (H_euc/K_euc) n.  Nodes with
// |K_euc| below eps_rel times the field maximum are parabolic and excluded.
inline MiddleSphereReport middle_sphere_check(const SurfaceMaps& maps,
                                              double eps_rel = 0.05) {
    const Grid& g = maps.grid;
    if (g.nx < 5 || g.ny < 5)
        throw std::invalid_argument("middle_sphere_check: grid too small");
    const Field<Vec3> fx = field_dx(maps.f), fy = field_dy(maps.f);
    const Field<Vec3> fxx = field_dxx(maps.f), fyy = field_dyy(maps.f);
    const Field<Vec3> fxy = field_dxy(maps.f);

    // Margin 2: curvature stencils must stay off the one-sided boundary ring.
    ScalarField Hf(g), Kf(g);
    for_interior(maps.f, 2, [&](int i, int j) {
        const Vec3& n = maps.n.at(i, j);
        const double E = dot(fx.at(i, j), fx.at(i, j));
        const double Fc = dot(fx.at(i, j), fy.at(i, j));
        const double G = dot(fy.at(i, j), fy.at(i, j));
        const double det = E * G - Fc * Fc;
        if (!(det > 0.0))
            throw std::runtime_error(
                "middle_sphere_check: degenerate first fundamental form");
        const double L = dot(fxx.at(i, j), n);
        const double M = dot(fxy.at(i, j), n);
        const double N = dot(fyy.at(i, j), n);
        Hf.at(i, j) = (E * N - 2.0 * Fc * M + G * L) / (2.0 * det);
        Kf.at(i, j) = (L * N - M * M) / det;
    });
    const double kmax = max_abs_interior(Kf, 2);
    const double eps_K = eps_rel * std::max(1e-12, kmax);

    MiddleSphereReport out;
    for_interior(maps.f, 2, [&](int i, int j) {
        if (std::fabs(Kf.at(i, j)) < eps_K) {
            ++out.parabolic_excluded;
            return;
        }
        const double r = Hf.at(i, j) / Kf.at(i, j);
        const OrientedSphere s = point_to_sphere(maps.sigma.at(i, j));
        out.radius_residual_max =
            std::max(out.radius_residual_max, std::fabs(s.radius - r));
        const Vec3 center = maps.f.at(i, j) + r * maps.n.at(i, j);
        out.center_residual_max =
            std::max(out.center_residual_max, max_abs(s.center - center));
        ++out.nodes_checked;
    });
    return out;
}

}  // namespace lagsurf
