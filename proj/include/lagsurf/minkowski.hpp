#pragma once

// Minkowski 4-space R^4_1 in a lightcone-adapted basis, the isotropy-preserving
// affine group acting on it, and its Lie algebra with a matrix exponential.
//
// The inner product is <v,w> = -(v1*w4 + v4*w1) + v2*w2 + v3*w3, so the first
// and fourth basis vectors are null and pair to -1.  Points of the positive
// lightcone satisfy <v,v> = 0 and <v, e1+e4> < 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace lagsurf {

inline constexpr double kValidityTol = 1e-9;

// ---------------------------------------------------------------------------
// small dense types

struct Vec4 {
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

    double& operator[](std::size_t i) { return c[i]; }
    double operator[](std::size_t i) const { return c[i]; }
};

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {{a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {{a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}};
}
inline Vec4 operator*(double s, const Vec4& a) {
    return {{s * a[0], s * a[1], s * a[2], s * a[3]}};
}
inline Vec4 operator-(const Vec4& a) { return {{-a[0], -a[1], -a[2], -a[3]}}; }

inline double euclid_norm2(const Vec4& v) {
    return v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3];
}
inline double max_abs(const Vec4& v) {
    return std::max(std::max(std::fabs(v[0]), std::fabs(v[1])),
                    std::max(std::fabs(v[2]), std::fabs(v[3])));
}

struct Mat4 {
    // row-major: m[r][c]
    std::array<std::array<double, 4>, 4> m{};

    static Mat4 identity() {
        Mat4 a;
        for (int i = 0; i < 4; ++i) a.m[i][i] = 1.0;
        return a;
    }
    static Mat4 zero() { return Mat4{}; }

    double& operator()(std::size_t r, std::size_t c) { return m[r][c]; }
    double operator()(std::size_t r, std::size_t c) const { return m[r][c]; }

    Vec4 column(std::size_t j) const {
        return {{m[0][j], m[1][j], m[2][j], m[3][j]}};
    }
    void set_column(std::size_t j, const Vec4& v) {
        for (int i = 0; i < 4; ++i) m[i][j] = v[i];
    }
};

inline Mat4 operator*(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double aik = a.m[i][k];
            if (aik == 0.0) continue;
            for (int j = 0; j < 4; ++j) r.m[i][j] += aik * b.m[k][j];
        }
    return r;
}
inline Vec4 operator*(const Mat4& a, const Vec4& v) {
    Vec4 r;
    for (int i = 0; i < 4; ++i)
        r[i] = a.m[i][0] * v[0] + a.m[i][1] * v[1] + a.m[i][2] * v[2] +
               a.m[i][3] * v[3];
    return r;
}
inline Mat4 operator+(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
}
inline Mat4 operator-(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
    return r;
}
inline Mat4 operator*(double s, const Mat4& a) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = s * a.m[i][j];
    return r;
}

inline Mat4 transpose(const Mat4& a) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = a.m[j][i];
    return r;
}

inline double det(const Mat4& a) {
    const auto& m = a.m;
    const double s0 = m[2][2] * m[3][3] - m[2][3] * m[3][2];
    const double s1 = m[2][1] * m[3][3] - m[2][3] * m[3][1];
    const double s2 = m[2][1] * m[3][2] - m[2][2] * m[3][1];
    const double s3 = m[2][0] * m[3][3] - m[2][3] * m[3][0];
    const double s4 = m[2][0] * m[3][2] - m[2][2] * m[3][0];
    const double s5 = m[2][0] * m[3][1] - m[2][1] * m[3][0];
    return m[0][0] * (m[1][1] * s0 - m[1][2] * s1 + m[1][3] * s2) -
           m[0][1] * (m[1][0] * s0 - m[1][2] * s3 + m[1][3] * s4) +
           m[0][2] * (m[1][0] * s1 - m[1][1] * s3 + m[1][3] * s5) -
           m[0][3] * (m[1][0] * s2 - m[1][1] * s4 + m[1][2] * s5);
}

inline double max_abs(const Mat4& a) {
    double r = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r = std::max(r, std::fabs(a.m[i][j]));
    return r;
}

// ---------------------------------------------------------------------------
// metric

inline double lorentz_dot(const Vec4& v, const Vec4& w) {
    return -(v[0] * w[3] + v[3] * w[0]) + v[1] * w[1] + v[2] * w[2];
}
inline double lorentz_norm2(const Vec4& v) { return lorentz_dot(v, v); }

// metric matrix g with g(0,3) = g(3,0) = -1, g(1,1) = g(2,2) = 1
inline Mat4 metric_matrix() {
    Mat4 g;
    g(0, 3) = -1.0;
    g(3, 0) = -1.0;
    g(1, 1) = 1.0;
    g(2, 2) = 1.0;
    return g;
}

// g is an involution (g*g = id), so it is its own inverse.
inline Vec4 apply_metric(const Vec4& v) {
    return {{-v[3], v[1], v[2], -v[0]}};
}

inline Vec4 basis_vector(std::size_t i) {
    Vec4 v;
    v[i] = 1.0;
    return v;
}

enum class CausalCharacter {
    spacelike,
    timelike,
    lightlike_positive,
    lightlike_negative,
    zero,
};

inline const char* to_string(CausalCharacter c) {
    switch (c) {
        case CausalCharacter::spacelike: return "spacelike";
        case CausalCharacter::timelike: return "timelike";
        case CausalCharacter::lightlike_positive: return "lightlike_positive";
        case CausalCharacter::lightlike_negative: return "lightlike_negative";
        case CausalCharacter::zero: return "zero";
    }
    return "unknown";
}

// Classify v by the sign of <v,v>, with |<v,v>| <= tol*(1+|v|^2) counted as
// lightlike.  Lightlike vectors split by cone: <v, e1+e4> = -(v1+v4), so
// v1+v4 > 0 marks the positive cone.
inline CausalCharacter causal_character(const Vec4& v,
                                        double tol = kValidityTol) {
    const double n2 = euclid_norm2(v);
    if (n2 <= tol * tol) return CausalCharacter::zero;
    const double q = lorentz_norm2(v);
    if (std::fabs(q) <= tol * (1.0 + n2)) {
        return (v[0] + v[3] > 0.0) ? CausalCharacter::lightlike_positive
                                   : CausalCharacter::lightlike_negative;
    }
    return q > 0.0 ? CausalCharacter::spacelike : CausalCharacter::timelike;
}

// ---------------------------------------------------------------------------
// group elements

// Affine map p -> translation + linear * p.  Valid elements have unimodular
// metric-preserving linear part whose first and fourth columns lie on the
// positive lightcone.
struct LaguerreElement {
    Vec4 translation;
    Mat4 linear = Mat4::identity();

    static LaguerreElement identity() { return LaguerreElement{}; }
};

// max_{i,j} |<a_i, a_j> - g_ij| over the columns a_i
inline double gram_residual(const Mat4& a) {
    const Mat4 g = metric_matrix();
    double r = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            r = std::max(r, std::fabs(lorentz_dot(a.column(i), a.column(j)) -
                                      g(i, j)));
    return r;
}

inline bool validate_laguerre_linear(const Mat4& a, double tol = kValidityTol) {
    if (std::fabs(det(a) - 1.0) > tol) return false;
    if (gram_residual(a) > tol) return false;
    // gram residual already bounds |<a_i,a_i>| for the null columns; the cone
    // condition is the sign of the pairing with e1+e4
    if (causal_character(a.column(0), tol) !=
        CausalCharacter::lightlike_positive)
        return false;
    if (causal_character(a.column(3), tol) !=
        CausalCharacter::lightlike_positive)
        return false;
    return true;
}

inline bool validate_element(const LaguerreElement& A,
                             double tol = kValidityTol) {
    return validate_laguerre_linear(A.linear, tol);
}

// (x,a) * [y,b] = [x + a*y, a*b]
inline LaguerreElement compose(const LaguerreElement& A,
                               const LaguerreElement& B) {
    return {A.translation + A.linear * B.translation, A.linear * B.linear};
}

// For a metric-preserving linear part, a^{-1} = g^{-1} a^T g (and g is its
// own inverse).
inline LaguerreElement inverse(const LaguerreElement& A) {
    if (gram_residual(A.linear) > 1e-6)
        throw std::invalid_argument(
            "inverse: linear part is not a Lorentz isometry");
    const Mat4 g = metric_matrix();
    const Mat4 ainv = g * transpose(A.linear) * g;
    return {-(ainv * A.translation), ainv};
}

inline Vec4 act_on_point(const LaguerreElement& A, const Vec4& p) {
    return A.translation + A.linear * p;
}

// ---------------------------------------------------------------------------
// isotropic lines

// Line {base + t*direction} with lightlike direction.  Canonical form:
// direction scaled so d1+d4 = 1, base shifted so b1+b4 = 0.
struct IsotropicLine {
    Vec4 base;
    Vec4 direction;
};

inline IsotropicLine make_isotropic_line(const Vec4& point, const Vec4& dir,
                                         double tol = kValidityTol) {
    const double q = lorentz_norm2(dir);
    if (std::fabs(q) > tol * (1.0 + euclid_norm2(dir)))
        throw std::invalid_argument("make_isotropic_line: direction not null");
    const double s = dir[0] + dir[3];
    if (std::fabs(s) <= tol)
        throw std::invalid_argument(
            "make_isotropic_line: direction pairs to zero with e1+e4");
    const Vec4 d = (1.0 / s) * dir;
    const double t = -(point[0] + point[3]);  // after normalization d1+d4 = 1
    return {point + t * d, d};
}

inline IsotropicLine act_on_line(const LaguerreElement& A,
                                 const IsotropicLine& L,
                                 double tol = kValidityTol) {
    if (!validate_laguerre_linear(A.linear, std::max(tol, 1e-7)))
        throw std::invalid_argument("act_on_line: invalid group element");
    return make_isotropic_line(act_on_point(A, L.base), A.linear * L.direction,
                               tol);
}

// componentwise distance between canonical forms
inline double line_residual(const IsotropicLine& L1, const IsotropicLine& L2) {
    return std::max(max_abs(L1.base - L2.base),
                    max_abs(L1.direction - L2.direction));
}

// ---------------------------------------------------------------------------
// Lie algebra and exponential

// Infinitesimal element (X, v): X satisfies X^T g + g X = 0, v is a free
// translation velocity.
struct AlgebraElement {
    Mat4 X;
    Vec4 v;
};

inline AlgebraElement operator*(double s, const AlgebraElement& xi) {
    return {s * xi.X, s * xi.v};
}
inline AlgebraElement operator+(const AlgebraElement& a,
                                const AlgebraElement& b) {
    return {a.X + b.X, a.v + b.v};
}

// max entry of X^T g + g X
inline double algebra_residual(const Mat4& X) {
    const Mat4 g = metric_matrix();
    const Mat4 r = transpose(X) * g + g * X;
    return max_abs(r);
}
inline double algebra_residual(const AlgebraElement& xi) {
    return algebra_residual(xi.X);
}

namespace detail {

// 5x5 homogeneous matrices for exp of the affine algebra
struct Mat5 {
    std::array<std::array<double, 5>, 5> m{};

    static Mat5 identity() {
        Mat5 a;
        for (int i = 0; i < 5; ++i) a.m[i][i] = 1.0;
        return a;
    }
};

inline Mat5 operator*(const Mat5& a, const Mat5& b) {
    Mat5 r;
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) {
            const double aik = a.m[i][k];
            if (aik == 0.0) continue;
            for (int j = 0; j < 5; ++j) r.m[i][j] += aik * b.m[k][j];
        }
    return r;
}

inline double max_abs(const Mat5& a) {
    double r = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r = std::max(r, std::fabs(a.m[i][j]));
    return r;
}

}  // namespace detail

// exp of the homogeneous embedding [[X, v], [0, 0]] by scaling and squaring
// with a fixed-order Taylor kernel.  The scaled norm is kept below 1/4, where
// 18 Taylor terms are far below double roundoff; relative accuracy ~1e-15.
inline LaguerreElement algebra_exp(const AlgebraElement& xi) {
    using detail::Mat5;
    Mat5 H;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) H.m[i][j] = xi.X(i, j);
        H.m[i][4] = xi.v[i];
    }

    const double norm = detail::max_abs(H);
    int s = 0;
    if (norm > 0.25) {
        s = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
        s = std::min(s, 60);
    }
    const double scale = std::ldexp(1.0, -s);
    Mat5 Hs;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) Hs.m[i][j] = H.m[i][j] * scale;

    // Taylor: E = I + Hs (I + Hs/2 (I + Hs/3 (...)))
    Mat5 E = Mat5::identity();
    constexpr int kOrder = 18;
    for (int k = kOrder; k >= 1; --k) {
        Mat5 t = Hs * E;
        E = Mat5::identity();
        const double inv = 1.0 / static_cast<double>(k);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) E.m[i][j] += t.m[i][j] * inv;
    }
    for (int k = 0; k < s; ++k) E = E * E;

    LaguerreElement A;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) A.linear(i, j) = E.m[i][j];
        A.translation[i] = E.m[i][4];
    }
    return A;
}

}  // namespace lagsurf
