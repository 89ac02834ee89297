#pragma once

// Cyclographic codecs: oriented spheres, planes and contact elements of
// Euclidean 3-space encoded as points, cone points and isotropic lines of
// Minkowski 4-space.
//
//   sphere (center p, signed radius r)  <->  x(p,r) = ((r+p1)/s2, p2, p3, (r-p1)/s2)
//   plane with unit normal n            <->  v(n)   = ((1+n1)/2, n2/s2, n3/s2, (1-n1)/2)
//   contact element (p, n)              <->  line [x(p,0), v(n)]
//
// with s2 = sqrt(2).  v(n) always lies on the positive cone and is already
// normalized to v1+v4 = 1; x(p,0) already satisfies x1+x4 = 0.

#include <cmath>
#include <stdexcept>

#include "minkowski.hpp"

namespace lagsurf {

struct Vec3 {
    std::array<double, 3> c{0.0, 0.0, 0.0};

    double& operator[](std::size_t i) { return c[i]; }
    double operator[](std::size_t i) const { return c[i]; }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {{a[0] + b[0], a[1] + b[1], a[2] + b[2]}};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {{a[0] - b[0], a[1] - b[1], a[2] - b[2]}};
}
inline Vec3 operator*(double s, const Vec3& a) {
    return {{s * a[0], s * a[1], s * a[2]}};
}
inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double max_abs(const Vec3& a) {
    return std::max(std::fabs(a[0]), std::max(std::fabs(a[1]), std::fabs(a[2])));
}

// Accept a normal that is unit length to within 1e-6 and renormalize it;
// anything further off is a caller error.
inline Vec3 normalize_unit(const Vec3& n) {
    const double len = norm(n);
    if (std::fabs(len - 1.0) > 1e-6)
        throw std::invalid_argument("normalize_unit: |n| deviates from 1");
    return (1.0 / len) * n;
}

struct OrientedSphere {
    Vec3 center;
    double radius = 0.0;  // signed; 0 encodes a point
};

struct OrientedPlane {
    Vec3 unit_normal;
    Vec3 through;  // any point on the plane
};

struct ContactElement {
    Vec3 point;
    Vec3 unit_normal;
};

// ---------------------------------------------------------------------------
// codecs

inline Vec4 sphere_to_point(const OrientedSphere& s) {
    constexpr double inv_s2 = 0.70710678118654752440;
    return {{(s.radius + s.center[0]) * inv_s2, s.center[1], s.center[2],
             (s.radius - s.center[0]) * inv_s2}};
}

inline OrientedSphere point_to_sphere(const Vec4& x) {
    constexpr double inv_s2 = 0.70710678118654752440;
    OrientedSphere s;
    s.radius = (x[0] + x[3]) * inv_s2;
    s.center = {{(x[0] - x[3]) * inv_s2, x[1], x[2]}};
    return s;
}

inline Vec4 isotropic_normal(const Vec3& unit_normal) {
    const Vec3 n = normalize_unit(unit_normal);
    constexpr double inv_s2 = 0.70710678118654752440;
    return {{0.5 * (1.0 + n[0]), n[1] * inv_s2, n[2] * inv_s2,
             0.5 * (1.0 - n[0])}};
}

inline Vec4 plane_to_isotropic_normal(const OrientedPlane& pl) {
    return isotropic_normal(pl.unit_normal);
}

// inverse of isotropic_normal for a cone point normalized to v1+v4 = 1
inline Vec3 normal_from_cone_point(const Vec4& v) {
    constexpr double s2 = 1.41421356237309504880;
    return {{v[0] - v[3], s2 * v[1], s2 * v[2]}};
}

inline IsotropicLine contact_to_line(const ContactElement& ce) {
    const OrientedSphere pt{ce.point, 0.0};
    return make_isotropic_line(sphere_to_point(pt),
                               isotropic_normal(ce.unit_normal));
}

// The canonical base of the line is the unique point sphere on it; the
// direction decodes to the shared unit normal.
inline ContactElement line_to_contact(const IsotropicLine& L) {
    ContactElement ce;
    const OrientedSphere s = point_to_sphere(L.base);
    ce.point = s.center;
    ce.unit_normal = normal_from_cone_point(L.direction);
    return ce;
}

// ---------------------------------------------------------------------------
// pair and system relations

enum class PairKind {
    oriented_contact,     // <D,D> = 0: common oriented tangent plane
    spacelike_separated,  // <D,D> > 0: real tangential distance
    timelike_separated,   // <D,D> < 0: nested without oriented contact
};

inline const char* to_string(PairKind k) {
    switch (k) {
        case PairKind::oriented_contact: return "oriented_contact";
        case PairKind::spacelike_separated: return "spacelike_separated";
        case PairKind::timelike_separated: return "timelike_separated";
    }
    return "unknown";
}

struct PairRelation {
    PairKind kind;
    double separation;  // sqrt(|<D,D>|): tangential distance when spacelike
};

// <D,D> = |c1-c2|^2 - (r1-r2)^2 for the cyclographic images
inline PairRelation pair_relation(const OrientedSphere& s1,
                                  const OrientedSphere& s2,
                                  double tol = kValidityTol) {
    const Vec4 d = sphere_to_point(s1) - sphere_to_point(s2);
    const double q = lorentz_norm2(d);
    PairRelation r;
    r.separation = std::sqrt(std::fabs(q));
    if (std::fabs(q) <= tol * (1.0 + euclid_norm2(d)))
        r.kind = PairKind::oriented_contact;
    else
        r.kind = q > 0.0 ? PairKind::spacelike_separated
                         : PairKind::timelike_separated;
    return r;
}

enum class QuadricClass { hyperbolic, de_sitter, lightcone };

inline const char* to_string(QuadricClass c) {
    switch (c) {
        case QuadricClass::hyperbolic: return "hyperbolic";
        case QuadricClass::de_sitter: return "de_sitter";
        case QuadricClass::lightcone: return "lightcone";
    }
    return "unknown";
}

// {x : <x-center, x-center> = rho}; rho < 0 is the hyperbolic branch,
// rho > 0 the de Sitter branch, rho = 0 the cone itself.
inline QuadricClass classify_quadric(double rho, double tol = kValidityTol) {
    if (std::fabs(rho) <= tol) return QuadricClass::lightcone;
    return rho < 0.0 ? QuadricClass::hyperbolic : QuadricClass::de_sitter;
}

inline double spherical_system_residual(const Vec4& x, const Vec4& center,
                                        double rho) {
    return lorentz_norm2(x - center) - rho;
}

enum class HyperplaneClass { spacelike, isotropic, timelike };

inline const char* to_string(HyperplaneClass c) {
    switch (c) {
        case HyperplaneClass::spacelike: return "spacelike";
        case HyperplaneClass::isotropic: return "isotropic";
        case HyperplaneClass::timelike: return "timelike";
    }
    return "unknown";
}

// {x : <x - through, v> = 0}: timelike v cuts a spacelike hyperplane,
// lightlike v an isotropic one, spacelike v a timelike one.
inline HyperplaneClass classify_hyperplane(const Vec4& v,
                                           double tol = kValidityTol) {
    switch (causal_character(v, tol)) {
        case CausalCharacter::timelike: return HyperplaneClass::spacelike;
        case CausalCharacter::spacelike: return HyperplaneClass::timelike;
        case CausalCharacter::lightlike_positive:
        case CausalCharacter::lightlike_negative:
            return HyperplaneClass::isotropic;
        case CausalCharacter::zero:
            throw std::invalid_argument("classify_hyperplane: zero normal");
    }
    throw std::logic_error("classify_hyperplane: unreachable");
}

inline double hyperplane_residual(const Vec4& x, const Vec4& through,
                                  const Vec4& v) {
    return lorentz_dot(x - through, v);
}

}  // namespace lagsurf
