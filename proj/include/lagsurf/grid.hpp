#pragma once

// Uniform tensor grids on rectangles, fields over them, and second-order
// finite-difference stencils.  Interior nodes use central differences; the
// boundary ring uses one-sided stencils of matching order so every node
// carries a value.  Accuracy statements and statistics downstream are taken
// over interior nodes only.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace lagsurf {

struct Grid {
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
    int nx = 0, ny = 0;

    Grid() = default;
    Grid(double x0_, double x1_, double y0_, double y1_, int nx_, int ny_)
        : x0(x0_), x1(x1_), y0(y0_), y1(y1_), nx(nx_), ny(ny_) {
        if (nx < 2 || ny < 2)
            throw std::invalid_argument("Grid: need at least 2 nodes per axis");
        if (!(x1 > x0) || !(y1 > y0))
            throw std::invalid_argument("Grid: empty extent");
    }

    double hx() const { return (x1 - x0) / (nx - 1); }
    double hy() const { return (y1 - y0) / (ny - 1); }
    double x(int i) const { return x0 + i * hx(); }
    double y(int j) const { return y0 + j * hy(); }
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * nx + i;
    }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

    bool same_extent(const Grid& o, double tol = 1e-12) const {
        return std::fabs(x0 - o.x0) <= tol && std::fabs(x1 - o.x1) <= tol &&
               std::fabs(y0 - o.y0) <= tol && std::fabs(y1 - o.y1) <= tol &&
               nx == o.nx && ny == o.ny;
    }
};

template <class T>
struct Field {
    Grid grid;
    std::vector<T> v;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), v(g.size()) {}

    T& at(int i, int j) { return v[grid.idx(i, j)]; }
    const T& at(int i, int j) const { return v[grid.idx(i, j)]; }
};

using ScalarField = Field<double>;

template <class F>
ScalarField make_scalar_field(const Grid& g, F&& f) {
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.at(i, j) = f(g.x(i), g.y(j));
    return out;
}

// ---------------------------------------------------------------------------
// stencils (all second order, one-sided on the boundary ring)

template <class T>
Field<T> field_dx(const Field<T>& f) {
    const Grid& g = f.grid;
    if (g.nx < 3) throw std::invalid_argument("field_dx: nx < 3");
    const double h = g.hx();
    Field<T> out(g);
    for (int j = 0; j < g.ny; ++j) {
        out.at(0, j) = (1.0 / (2.0 * h)) *
                       (-3.0 * f.at(0, j) + 4.0 * f.at(1, j) - f.at(2, j));
        for (int i = 1; i < g.nx - 1; ++i)
            out.at(i, j) = (1.0 / (2.0 * h)) * (f.at(i + 1, j) - f.at(i - 1, j));
        const int n = g.nx - 1;
        out.at(n, j) = (1.0 / (2.0 * h)) *
                       (3.0 * f.at(n, j) - 4.0 * f.at(n - 1, j) + f.at(n - 2, j));
    }
    return out;
}

template <class T>
Field<T> field_dy(const Field<T>& f) {
    const Grid& g = f.grid;
    if (g.ny < 3) throw std::invalid_argument("field_dy: ny < 3");
    const double h = g.hy();
    Field<T> out(g);
    for (int i = 0; i < g.nx; ++i) {
        out.at(i, 0) = (1.0 / (2.0 * h)) *
                       (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2));
        for (int j = 1; j < g.ny - 1; ++j)
            out.at(i, j) = (1.0 / (2.0 * h)) * (f.at(i, j + 1) - f.at(i, j - 1));
        const int n = g.ny - 1;
        out.at(i, n) = (1.0 / (2.0 * h)) *
                       (3.0 * f.at(i, n) - 4.0 * f.at(i, n - 1) + f.at(i, n - 2));
    }
    return out;
}

template <class T>
Field<T> field_dxx(const Field<T>& f) {
    const Grid& g = f.grid;
    if (g.nx < 4) throw std::invalid_argument("field_dxx: nx < 4");
    const double h2 = g.hx() * g.hx();
    Field<T> out(g);
    for (int j = 0; j < g.ny; ++j) {
        out.at(0, j) = (1.0 / h2) * (2.0 * f.at(0, j) - 5.0 * f.at(1, j) +
                                     4.0 * f.at(2, j) - f.at(3, j));
        for (int i = 1; i < g.nx - 1; ++i)
            out.at(i, j) = (1.0 / h2) * (f.at(i + 1, j) - 2.0 * f.at(i, j) +
                                         f.at(i - 1, j));
        const int n = g.nx - 1;
        out.at(n, j) = (1.0 / h2) * (2.0 * f.at(n, j) - 5.0 * f.at(n - 1, j) +
                                     4.0 * f.at(n - 2, j) - f.at(n - 3, j));
    }
    return out;
}

template <class T>
Field<T> field_dyy(const Field<T>& f) {
    const Grid& g = f.grid;
    if (g.ny < 4) throw std::invalid_argument("field_dyy: ny < 4");
    const double h2 = g.hy() * g.hy();
    Field<T> out(g);
    for (int i = 0; i < g.nx; ++i) {
        out.at(i, 0) = (1.0 / h2) * (2.0 * f.at(i, 0) - 5.0 * f.at(i, 1) +
                                     4.0 * f.at(i, 2) - f.at(i, 3));
        for (int j = 1; j < g.ny - 1; ++j)
            out.at(i, j) = (1.0 / h2) * (f.at(i, j + 1) - 2.0 * f.at(i, j) +
                                         f.at(i, j - 1));
        const int n = g.ny - 1;
        out.at(i, n) = (1.0 / h2) * (2.0 * f.at(i, n) - 5.0 * f.at(i, n - 1) +
                                     4.0 * f.at(i, n - 2) - f.at(i, n - 3));
    }
    return out;
}

template <class T>
Field<T> field_laplacian(const Field<T>& f) {
    Field<T> xx = field_dxx(f);
    const Field<T> yy = field_dyy(f);
    for (std::size_t k = 0; k < xx.v.size(); ++k) xx.v[k] = xx.v[k] + yy.v[k];
    return xx;
}

template <class T>
Field<T> field_dxy(const Field<T>& f) {
    return field_dy(field_dx(f));
}

// ---------------------------------------------------------------------------
// statistics

template <class T, class F>
void for_interior(const Field<T>& f, int margin, F&& fn) {
    const Grid& g = f.grid;
    for (int j = margin; j < g.ny - margin; ++j)
        for (int i = margin; i < g.nx - margin; ++i) fn(i, j);
}

inline double max_abs_interior(const ScalarField& f, int margin = 1) {
    double r = 0.0;
    for_interior(f, margin,
                 [&](int i, int j) { r = std::max(r, std::fabs(f.at(i, j))); });
    return r;
}

inline double mean_interior(const ScalarField& f, int margin = 1) {
    double s = 0.0;
    std::size_t n = 0;
    for_interior(f, margin, [&](int i, int j) {
        s += f.at(i, j);
        ++n;
    });
    return n ? s / static_cast<double>(n) : 0.0;
}

inline double max_abs(const ScalarField& f) {
    double r = 0.0;
    for (double x : f.v) r = std::max(r, std::fabs(x));
    return r;
}

// least-squares slope of log(e) against log(h)
inline double fit_loglog_slope(const std::vector<double>& h,
                               const std::vector<double>& e) {
    if (h.size() != e.size() || h.size() < 2)
        throw std::invalid_argument("fit_loglog_slope: need matched samples");
    const std::size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double lx = std::log(h[k]);
        const double ly = std::log(e[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace lagsurf
