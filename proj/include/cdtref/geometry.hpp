#ifndef CDTREF_GEOMETRY_HPP
#define CDTREF_GEOMETRY_HPP

#include <cmath>
#include <cstdint>

namespace cdtref {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const Point2&, const Point2&) = default;
};

constexpr Point2 operator-(const Point2& a, const Point2& b) { return {a.x - b.x, a.y - b.y}; }
constexpr Point2 operator+(const Point2& a, const Point2& b) { return {a.x + b.x, a.y + b.y}; }
constexpr Point2 operator*(double s, const Point2& a) { return {s * a.x, s * a.y}; }

constexpr double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }

constexpr double squared_distance(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(const Point2& a, const Point2& b) { return std::sqrt(squared_distance(a, b)); }

constexpr Point2 midpoint(const Point2& a, const Point2& b) {
    return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

inline bool finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

} // namespace cdtref

#endif
