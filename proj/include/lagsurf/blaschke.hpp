#pragma once

// Blaschke potentials u on rectangular grids.  Special potentials solve the
// Liouville equation lap u = c*exp(-2u) (c is the character); the general
// compatibility condition is Blaschke's equation lap(exp(-u)*(exp u)_xy) = 0.
// This module provides analytic seeds, PDE residuals, a damped Newton solver,
// the surface invariants derived from u, and path integration of the closed
// one-form eta attached to u.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "grid.hpp"

namespace lagsurf {

struct Potential {
    ScalarField u;
    std::optional<double> c;  // character; set only for special potentials
    double k = 0.0;           // spectral base parameter
};

// ---------------------------------------------------------------------------
// residuals

// lap_h u - c*exp(-2u) on interior nodes; the boundary ring carries NaN
// (no 5-point stencil there) and is excluded from statistics.
inline ScalarField liouville_residual(const ScalarField& u, double c) {
    const Grid& g = u.grid;
    ScalarField r(g);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = nan;
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const double lap =
                (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) * ihx2 +
                (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) * ihy2;
            r.at(i, j) = lap - c * std::exp(-2.0 * u.at(i, j));
        }
    return r;
}

// lap_h of the discrete exp(-u)*(exp u)_xy; needs a margin of two nodes, so
// the outer two rings carry NaN.
inline ScalarField blaschke_residual(const ScalarField& u) {
    const Grid& g = u.grid;
    if (g.nx < 5 || g.ny < 5)
        throw std::invalid_argument("blaschke_residual: grid smaller than 5x5");
    ScalarField eu(g);
    for (std::size_t k = 0; k < eu.v.size(); ++k) eu.v[k] = std::exp(u.v[k]);
    ScalarField phi = field_dxy(eu);
    for (std::size_t k = 0; k < phi.v.size(); ++k) phi.v[k] /= eu.v[k];
    ScalarField lap = field_laplacian(phi);
    ScalarField r(g);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] = nan;
    for_interior(r, 2, [&](int i, int j) { r.at(i, j) = lap.at(i, j); });
    return r;
}

// ---------------------------------------------------------------------------
// seeds

namespace detail {

// Certify a potential that claims character c: its interior Liouville
// residual must be at stencil-error scale, not at equation-violation scale.
inline void certify_character(const ScalarField& u, double c) {
    const Grid& g = u.grid;
    const double h = std::max(g.hx(), g.hy());
    const double bound = 10.0 * h * h * (1.0 + std::fabs(c));
    const double res = max_abs_interior(liouville_residual(u, c));
    if (!(res <= bound))
        throw std::invalid_argument(
            "potential fails Liouville certification: residual " +
            std::to_string(res) + " > " + std::to_string(bound));
}

}  // namespace detail

// u = ln(1 + (c/4)(x^2+y^2)); requires 1 + (c/4)r^2 > 0 on the whole grid.
inline Potential seed_radial(const Grid& g, double c, double k) {
    ScalarField u = make_scalar_field(g, [c](double x, double y) {
        return 1.0 + 0.25 * c * (x * x + y * y);
    });
    for (double& phi : u.v) {
        if (!(phi > 0.0))
            throw std::invalid_argument(
                "seed_radial: 1 + (c/4)r^2 not positive on grid");
        phi = std::log(phi);
    }
    detail::certify_character(u, c);
    return {std::move(u), c, k};
}

// u = ln cosh(sqrt(c) x); only c > 0 keeps the argument real.
inline Potential seed_cosh1d(const Grid& g, double c, double k) {
    if (!(c > 0.0))
        throw std::invalid_argument("seed_cosh1d: requires c > 0");
    const double s = std::sqrt(c);
    ScalarField u = make_scalar_field(
        g, [s](double x, double) { return std::log(std::cosh(s * x)); });
    detail::certify_character(u, c);
    return {std::move(u), c, k};
}

// u = a*x + b*y, harmonic, character 0.
inline Potential seed_harmonic(const Grid& g, double a, double b, double k) {
    ScalarField u =
        make_scalar_field(g, [a, b](double x, double y) { return a * x + b * y; });
    detail::certify_character(u, 0.0);
    return {std::move(u), 0.0, k};
}

inline Potential make_custom_potential(ScalarField u, std::optional<double> c,
                                       double k) {
    if (c) detail::certify_character(u, *c);
    return {std::move(u), c, k};
}

// ---------------------------------------------------------------------------
// Newton solver for lap u = c*exp(-2u), Dirichlet data on the boundary ring

struct NewtonTrace {
    std::vector<double> residuals;  // max-norm, starting with the initial one
    int iterations = 0;
    bool converged = false;
    std::string failure;
};

struct NewtonResult {
    Potential potential;
    NewtonTrace trace;
};

namespace detail {

inline double liouville_max_residual(const ScalarField& u, double c) {
    return max_abs_interior(liouville_residual(u, c));
}

}  // namespace detail

// Damped Newton on F(u) = lap_h u - c*exp(-2u) over interior unknowns with
// Jacobian lap_h + 2c*exp(-2u)*diag.  Backtracking halves the step at most
// 20 times until the residual norm decreases.
inline NewtonResult newton_solve_liouville(double c,
                                           const ScalarField& boundary,
                                           const ScalarField& u_init,
                                           double tol, int max_iter) {
    if (!(tol > 0.0))
        throw std::invalid_argument("newton_solve_liouville: tol must be > 0");
    const Grid& g = boundary.grid;
    if (!u_init.grid.same_extent(g))
        throw std::invalid_argument("newton_solve_liouville: grid mismatch");
    if (g.nx < 3 || g.ny < 3)
        throw std::invalid_argument("newton_solve_liouville: grid too small");

    ScalarField u = u_init;
    for (int i = 0; i < g.nx; ++i) {
        u.at(i, 0) = boundary.at(i, 0);
        u.at(i, g.ny - 1) = boundary.at(i, g.ny - 1);
    }
    for (int j = 0; j < g.ny; ++j) {
        u.at(0, j) = boundary.at(0, j);
        u.at(g.nx - 1, j) = boundary.at(g.nx - 1, j);
    }

    NewtonResult out;
    NewtonTrace& trace = out.trace;
    double rnorm = detail::liouville_max_residual(u, c);
    trace.residuals.push_back(rnorm);

    const int mx = g.nx - 2, my = g.ny - 2;
    const int n = mx * my;
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    auto row_of = [&](int i, int j) { return (j - 1) * mx + (i - 1); };

    for (int it = 1; it <= max_iter && rnorm >= tol; ++it) {
        ScalarField F = liouville_residual(u, c);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(5) * n);
        Eigen::VectorXd rhs(n);
        for (int j = 1; j <= my; ++j)
            for (int i = 1; i <= mx; ++i) {
                const int r = row_of(i, j);
                rhs[r] = -F.at(i, j);
                const double diag = -2.0 * (ihx2 + ihy2) +
                                    2.0 * c * std::exp(-2.0 * u.at(i, j));
                trip.emplace_back(r, r, diag);
                if (i > 1) trip.emplace_back(r, row_of(i - 1, j), ihx2);
                if (i < mx) trip.emplace_back(r, row_of(i + 1, j), ihx2);
                if (j > 1) trip.emplace_back(r, row_of(i, j - 1), ihy2);
                if (j < my) trip.emplace_back(r, row_of(i, j + 1), ihy2);
            }
        Eigen::SparseMatrix<double> Jm(n, n);
        Jm.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(Jm);
        if (lu.info() != Eigen::Success) {
            trace.failure = "singular_jacobian";
            break;
        }
        const Eigen::VectorXd delta = lu.solve(rhs);

        double t = 1.0;
        ScalarField trial = u;
        double tnorm = rnorm;
        for (int halving = 0; halving <= 20; ++halving) {
            for (int j = 1; j <= my; ++j)
                for (int i = 1; i <= mx; ++i)
                    trial.at(i, j) = u.at(i, j) + t * delta[row_of(i, j)];
            tnorm = detail::liouville_max_residual(trial, c);
            if (tnorm < rnorm) break;
            t *= 0.5;
        }
        if (!(tnorm < rnorm)) {
            trace.failure = "line_search_stalled";
            break;
        }
        u = trial;
        rnorm = tnorm;
        trace.residuals.push_back(rnorm);
        trace.iterations = it;
    }
    trace.converged = rnorm < tol;
    out.potential =
        Potential{std::move(u), trace.converged ? std::optional<double>(c)
                                                : std::nullopt,
                  0.0};
    return out;
}

// ---------------------------------------------------------------------------
// invariants

// Per-node surface invariants of the spectral family member at shift m:
//   q1 = -exp(-u) u_y   q2 = exp(-u) u_x
//   J  = -1/2 exp(-2u) lap_h u      W = (k+m) exp(-2u)
//   p1 = W + J, p2 = 0, p3 = W - J
struct InvariantField {
    Grid grid;
    ScalarField u, ux, uy, expu;
    ScalarField q1, q2, J, W, p1, p2, p3;
    double c = 0.0, k = 0.0, m = 0.0;
};

inline InvariantField invariants_from_potential(const Potential& p, double m) {
    if (!p.c)
        throw std::invalid_argument(
            "invariants_from_potential: potential has no character");
    InvariantField inv;
    inv.grid = p.u.grid;
    inv.c = *p.c;
    inv.k = p.k;
    inv.m = m;
    inv.u = p.u;
    inv.ux = field_dx(p.u);
    inv.uy = field_dy(p.u);
    const ScalarField lap = field_laplacian(p.u);
    const std::size_t n = p.u.v.size();
    inv.expu = ScalarField(inv.grid);
    inv.q1 = ScalarField(inv.grid);
    inv.q2 = ScalarField(inv.grid);
    inv.J = ScalarField(inv.grid);
    inv.W = ScalarField(inv.grid);
    inv.p1 = ScalarField(inv.grid);
    inv.p2 = ScalarField(inv.grid);
    inv.p3 = ScalarField(inv.grid);
    for (std::size_t t = 0; t < n; ++t) {
        const double eu = std::exp(p.u.v[t]);
        const double e2u = eu * eu;
        inv.expu.v[t] = eu;
        inv.q1.v[t] = -inv.uy.v[t] / eu;
        inv.q2.v[t] = inv.ux.v[t] / eu;
        inv.J.v[t] = -0.5 * lap.v[t] / e2u;
        inv.W.v[t] = (p.k + m) / e2u;
        inv.p1.v[t] = inv.W.v[t] + inv.J.v[t];
        inv.p2.v[t] = 0.0;
        inv.p3.v[t] = inv.W.v[t] - inv.J.v[t];
    }
    return inv;
}

// ---------------------------------------------------------------------------
// the closed one-form eta and its primitive

struct OneFormField {
    Grid grid;
    ScalarField wx, wy;
};

struct EtaResult {
    ScalarField K;
    OneFormField eta;
    double circulation_max = 0.0;
};

// eta = -e^{2u}[(e^{-2u} lap u)_x + 4 u_x e^{-2u} lap u] dx
//       +e^{2u}[(e^{-2u} lap u)_y + 4 u_y e^{-2u} lap u] dy
// Closedness of eta is exactly Blaschke's equation; the primitive K is pinned
// to k0 at the lower-left interior node.  Throws when the measured plaquette
// circulation is above the closedness threshold.
inline EtaResult integrate_eta(const ScalarField& u, double k0,
                               double curl_tol_coeff = 0.05) {
    const Grid& g = u.grid;
    if (g.nx < 4 || g.ny < 4)
        throw std::invalid_argument("integrate_eta: grid too small");
    const ScalarField ux = field_dx(u);
    const ScalarField uy = field_dy(u);
    ScalarField G = field_laplacian(u);
    for (std::size_t t = 0; t < G.v.size(); ++t)
        G.v[t] *= std::exp(-2.0 * u.v[t]);
    const ScalarField Gx = field_dx(G);
    const ScalarField Gy = field_dy(G);

    EtaResult out;
    out.eta.grid = g;
    out.eta.wx = ScalarField(g);
    out.eta.wy = ScalarField(g);
    for (std::size_t t = 0; t < u.v.size(); ++t) {
        const double e2u = std::exp(2.0 * u.v[t]);
        out.eta.wx.v[t] = -e2u * (Gx.v[t] + 4.0 * ux.v[t] * G.v[t]);
        out.eta.wy.v[t] = e2u * (Gy.v[t] + 4.0 * uy.v[t] * G.v[t]);
    }

    const ScalarField& wx = out.eta.wx;
    const ScalarField& wy = out.eta.wy;
    const double hx = g.hx(), hy = g.hy();
    double circ_max = 0.0;
    for (int j = 0; j < g.ny - 1; ++j)
        for (int i = 0; i < g.nx - 1; ++i) {
            const double circ =
                0.5 * hx * (wx.at(i, j) + wx.at(i + 1, j)) +
                0.5 * hy * (wy.at(i + 1, j) + wy.at(i + 1, j + 1)) -
                0.5 * hx * (wx.at(i, j + 1) + wx.at(i + 1, j + 1)) -
                0.5 * hy * (wy.at(i, j) + wy.at(i, j + 1));
            circ_max = std::max(circ_max, std::fabs(circ));
        }
    out.circulation_max = circ_max;

    double wmax = 0.0;
    for (std::size_t t = 0; t < wx.v.size(); ++t)
        wmax = std::max(wmax,
                        std::max(std::fabs(wx.v[t]), std::fabs(wy.v[t])));
    const double h = std::max(hx, hy);
    const double threshold = curl_tol_coeff * (1.0 + wmax) * h * h;
    if (circ_max > threshold)
        throw std::runtime_error(
            "integrate_eta: one-form is not closed (circulation " +
            std::to_string(circ_max) + " > " + std::to_string(threshold) +
            "); input potential is not compatible");

    // trapezoid along the bottom row, then up each column
    ScalarField K(g);
    K.at(0, 0) = 0.0;
    for (int i = 1; i < g.nx; ++i)
        K.at(i, 0) =
            K.at(i - 1, 0) + 0.5 * hx * (wx.at(i - 1, 0) + wx.at(i, 0));
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            K.at(i, j) =
                K.at(i, j - 1) + 0.5 * hy * (wy.at(i, j - 1) + wy.at(i, j));
    const double shift = k0 - K.at(1, 1);
    for (double& v : K.v) v += shift;
    out.K = std::move(K);
    return out;
}

}  // namespace lagsurf
