#ifndef CDTREF_PREDICATES_HPP
#define CDTREF_PREDICATES_HPP

// Exact-decision geometric predicates: fast floating-point evaluation with a
// forward error bound, falling back to exact expansion arithmetic whenever the
// filter cannot certify the sign.

#include <cmath>
#include <limits>
#include <optional>

#include "cdtref/detail/expansion.hpp"
#include "cdtref/geometry.hpp"

namespace cdtref {

enum class Orientation : int { Negative = -1, Zero = 0, Positive = 1 };

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;
inline constexpr double kOrientErrBound = (3.0 + 16.0 * kEps) * kEps;
inline constexpr double kIncircleErrBound = (10.0 + 96.0 * kEps) * kEps;

inline Orientation to_orientation(int s) {
    return s > 0 ? Orientation::Positive : (s < 0 ? Orientation::Negative : Orientation::Zero);
}

// Exact sign of ax*(by-cy) + bx*(cy-ay) + cx*(ay-by).
inline int orient2d_exact(const Point2& a, const Point2& b, const Point2& c) {
    using E2 = Expansion<2>;
    const auto det = E2::product(a.x, b.y) - E2::product(a.x, c.y) + E2::product(b.x, c.y) -
                     E2::product(b.x, a.y) + E2::product(c.x, a.y) - E2::product(c.x, b.y);
    return det.sign();
}

// orient2d determinant as an exact expansion, for reuse inside incircle.
inline Expansion<12> orient2d_expansion(const Point2& a, const Point2& b, const Point2& c) {
    using E2 = Expansion<2>;
    const auto det = E2::product(a.x, b.y) - E2::product(a.x, c.y) + E2::product(b.x, c.y) -
                     E2::product(b.x, a.y) + E2::product(c.x, a.y) - E2::product(c.x, b.y);
    Expansion<12> r;
    r.n = det.n;
    for (std::size_t i = 0; i < det.n; ++i) r.c[i] = det.c[i];
    return r;
}

// Exact sign of the 4x4 incircle determinant, expanded along the lifted
// column: sum over p of +-lift(p) * orient_det(of the other three points).
inline int incircle_exact(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    using E2 = Expansion<2>;
    auto lift = [](const Point2& p) { return E2::product(p.x, p.x) + E2::product(p.y, p.y); };
    const auto term_a = lift(a) * orient2d_expansion(b, c, d);
    const auto term_b = lift(b) * orient2d_expansion(a, c, d);
    const auto term_c = lift(c) * orient2d_expansion(a, b, d);
    const auto term_d = lift(d) * orient2d_expansion(a, b, c);
    const auto det = (term_a - term_b) + (term_c - term_d);
    return det.sign();
}

} // namespace detail

inline Orientation orient2d(const Point2& a, const Point2& b, const Point2& c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    if (detleft > 0.0) {
        if (detright <= 0.0) return detail::to_orientation((det > 0.0) - (det < 0.0));
    } else if (detleft < 0.0) {
        if (detright >= 0.0) return detail::to_orientation((det > 0.0) - (det < 0.0));
    } else {
        return detail::to_orientation((detright < 0.0) - (detright > 0.0));
    }
    const double detsum = std::abs(detleft) + std::abs(detright);
    if (std::abs(det) > detail::kOrientErrBound * detsum) {
        return detail::to_orientation((det > 0.0) - (det < 0.0));
    }
    return detail::to_orientation(detail::orient2d_exact(a, b, c));
}

// Positive iff d lies strictly inside the circumcircle of CCW triangle abc.
inline Orientation incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double alift = adx * adx + ady * ady;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double blift = bdx * bdx + bdy * bdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double clift = cdx * cdx + cdy * cdy;

    const double det =
        alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    if (std::abs(det) > detail::kIncircleErrBound * permanent) {
        return detail::to_orientation((det > 0.0) - (det < 0.0));
    }
    return detail::to_orientation(detail::incircle_exact(a, b, c, d));
}

// True iff p lies strictly inside the circle whose diameter is segment (sa,sb).
// Equivalent to the angle at p being strictly obtuse: dot(sa-p, sb-p) < 0.
inline bool in_diametric_circle(const Point2& sa, const Point2& sb, const Point2& p) {
    const Point2 u = sa - p;
    const Point2 v = sb - p;
    const double d = dot(u, v);
    const double mag = std::abs(u.x * v.x) + std::abs(u.y * v.y);
    if (std::abs(d) > 8.0 * detail::kEps * mag) return d < 0.0;
    // Exact: (sax-px)(sbx-px) + (say-py)(sby-py), expanded in raw coordinates.
    using E2 = cdtref::detail::Expansion<2>;
    const auto e = E2::product(sa.x, sb.x) - E2::product(sa.x, p.x) - E2::product(p.x, sb.x) +
                   E2::product(p.x, p.x) + E2::product(sa.y, sb.y) - E2::product(sa.y, p.y) -
                   E2::product(p.y, sb.y) + E2::product(p.y, p.y);
    return e.sign() < 0;
}

inline constexpr double kLensAngleDegrees = 120.0;

// True iff the angle subtended at p by segment (sa,sb) is at least 120
// degrees, i.e. dot(u,v) <= -1/2 |u||v| with u = sa-p, v = sb-p.
// Decided by the sign of 4*dot(u,v)^2 - |u|^2 |v|^2 with dot(u,v) < 0.
inline bool in_diametral_lens(const Point2& sa, const Point2& sb, const Point2& p) {
    if (p == sa || p == sb) return false;
    const Point2 u = sa - p;
    const Point2 v = sb - p;
    const double d = dot(u, v);
    if (d >= 0.0) {
        // Angle <= 90 degrees unless d is a rounding artifact near zero;
        // either way it is far from the 120 degree threshold.
        return false;
    }
    const double uu = dot(u, u);
    const double vv = dot(v, v);
    const double lhs = 4.0 * d * d;
    const double rhs = uu * vv;
    if (std::abs(lhs - rhs) > 64.0 * detail::kEps * (lhs + rhs)) return lhs >= rhs;
    // Exact evaluation of 4*dot^2 - |u|^2|v|^2 over the difference vectors.
    // The differences themselves are kept exact as two-component expansions.
    using cdtref::detail::Expansion;
    using cdtref::detail::two_diff;
    auto comp = [](double hi, double lo) {
        Expansion<2> e;
        e.n = 0;
        if (lo != 0.0) e.c[e.n++] = lo;
        e.c[e.n++] = hi;
        return e;
    };
    const auto ux = two_diff(sa.x, p.x), uy = two_diff(sa.y, p.y);
    const auto vx = two_diff(sb.x, p.x), vy = two_diff(sb.y, p.y);
    const auto ex = comp(ux.hi, ux.lo), ey = comp(uy.hi, uy.lo);
    const auto fx = comp(vx.hi, vx.lo), fy = comp(vy.hi, vy.lo);
    const auto dote = ex * fx + ey * fy;       // <= 16 components
    const auto ulen = ex * ex + ey * ey;
    const auto vlen = fx * fx + fy * fy;
    const auto four = Expansion<1>::of(4.0);
    const auto result = four * (dote * dote) - ulen * vlen;
    return dote.sign() < 0 && result.sign() >= 0;
}

struct Circumcenter {
    Point2 center;
    bool well_conditioned;
};

// Circumcenter of CCW triangle abc via the perpendicular-bisector determinant
// formula. well_conditioned is false when the triangle is so flat that the
// center is numerically unreliable.
inline Circumcenter circumcenter(const Point2& a, const Point2& b, const Point2& c) {
    const Point2 ab = b - a;
    const Point2 ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = dot(ab, ab);
    const double ac2 = dot(ac, ac);
    const double ux = (ac.y * ab2 - ab.y * ac2) / d;
    const double uy = (ab.x * ac2 - ac.x * ab2) / d;
    const Point2 center{a.x + ux, a.y + uy};
    const double scale = std::max(ab2, ac2);
    const bool ok = std::isfinite(center.x) && std::isfinite(center.y) &&
                    std::abs(d) > 1e-12 * scale;
    return {center, ok};
}

} // namespace cdtref

#endif
