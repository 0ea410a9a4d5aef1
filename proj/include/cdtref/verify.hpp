#ifndef CDTREF_VERIFY_HPP
#define CDTREF_VERIFY_HPP

// Whole-mesh oracles, independent of the flip-based machinery: global
// circumcircle emptiness (with segment-visibility exemption) and input
// segment conformity. Used by tests and the CLI post-run verification pass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "cdtref/cdt.hpp"
#include "cdtref/mesh.hpp"
#include "cdtref/predicates.hpp"

namespace cdtref {

namespace detail {

// Uniform bucket grid over the alive vertices; conservative bbox queries.
class PointGrid {
public:
    explicit PointGrid(const Mesh& m) {
        min_ = {1e300, 1e300};
        max_ = {-1e300, -1e300};
        for (VertexId v = 0; v < m.vertices.size(); ++v) {
            if (!m.vertices[v].alive) continue;
            const Point2& p = m.pos(v);
            min_.x = std::min(min_.x, p.x);
            min_.y = std::min(min_.y, p.y);
            max_.x = std::max(max_.x, p.x);
            max_.y = std::max(max_.y, p.y);
            ++count_;
        }
        side_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(count_))));
        cells_.resize(side_ * side_);
        for (VertexId v = 0; v < m.vertices.size(); ++v) {
            if (!m.vertices[v].alive) continue;
            cells_[cell_index(m.pos(v))].push_back(v);
        }
    }

    template <class Fn>
    void for_each_in_box(const Point2& lo, const Point2& hi, Fn&& fn) const {
        const auto [ix0, iy0] = cell_coords(lo);
        const auto [ix1, iy1] = cell_coords(hi);
        for (std::size_t iy = iy0; iy <= iy1; ++iy) {
            for (std::size_t ix = ix0; ix <= ix1; ++ix) {
                for (VertexId v : cells_[iy * side_ + ix]) fn(v);
            }
        }
    }

private:
    std::pair<std::size_t, std::size_t> cell_coords(const Point2& p) const {
        const double w = std::max(max_.x - min_.x, 1e-300);
        const double h = std::max(max_.y - min_.y, 1e-300);
        const double fx = std::clamp((p.x - min_.x) / w, 0.0, 1.0);
        const double fy = std::clamp((p.y - min_.y) / h, 0.0, 1.0);
        const std::size_t ix = std::min(side_ - 1, static_cast<std::size_t>(fx * double(side_)));
        const std::size_t iy = std::min(side_ - 1, static_cast<std::size_t>(fy * double(side_)));
        return {ix, iy};
    }
    std::size_t cell_index(const Point2& p) const {
        const auto [ix, iy] = cell_coords(p);
        return iy * side_ + ix;
    }

    Point2 min_, max_;
    std::size_t side_ = 1;
    std::size_t count_ = 0;
    std::vector<std::vector<VertexId>> cells_;
};

// Does some subsegment properly block the open sightline (a,b)?
inline bool sightline_blocked(const Mesh& m, const Point2& a, const Point2& b) {
    for (const Subsegment& s : m.subsegments) {
        if (!s.alive) continue;
        if (proper_cross(a, b, m.pos(s.v[0]), m.pos(s.v[1]))) return true;
    }
    return false;
}

} // namespace detail

// Number of (triangle, vertex) pairs violating constrained circumcircle
// emptiness: vertex strictly inside the circumcircle and visible to at least
// one triangle corner. Exact incircle decisions; the grid only prunes
// vertices that are certainly outside a conservative circumcircle box.
inline std::size_t constrained_delaunay_violations(const Mesh& m, std::size_t report_cap = 32) {
    const detail::PointGrid grid(m);
    std::size_t violations = 0;
    for (TriId t = 0; t < m.triangles.size() && violations < report_cap; ++t) {
        const Triangle& tt = m.triangles[t];
        if (!tt.alive) continue;
        const Point2& a = m.pos(tt.v[0]);
        const Point2& b = m.pos(tt.v[1]);
        const Point2& c = m.pos(tt.v[2]);
        const auto cc = circumcenter(a, b, c);
        Point2 lo, hi;
        if (cc.well_conditioned) {
            const double r = std::sqrt(std::max({squared_distance(cc.center, a),
                                                 squared_distance(cc.center, b),
                                                 squared_distance(cc.center, c)}));
            const double margin = 1e-6 * r + 1e-300;
            lo = {cc.center.x - r - margin, cc.center.y - r - margin};
            hi = {cc.center.x + r + margin, cc.center.y + r + margin};
        } else {
            // Flat triangle: fall back to a box covering everything.
            lo = {-1e300, -1e300};
            hi = {1e300, 1e300};
        }
        // Visibility is from the triangle's interior: a vertex hidden behind a
        // constraint (including one running through a corner) is exempt.
        const Point2 centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
        grid.for_each_in_box(lo, hi, [&](VertexId v) {
            if (v == tt.v[0] || v == tt.v[1] || v == tt.v[2]) return;
            if (incircle(a, b, c, m.pos(v)) != Orientation::Positive) return;
            if (!detail::sightline_blocked(m, m.pos(v), centroid)) ++violations;
        });
    }
    return violations;
}

// Unconstrained variant (for plain Delaunay construction tests).
inline std::size_t delaunay_violations(const Mesh& m, std::size_t report_cap = 32) {
    std::size_t violations = 0;
    for (TriId t = 0; t < m.triangles.size() && violations < report_cap; ++t) {
        const Triangle& tt = m.triangles[t];
        if (!tt.alive) continue;
        for (VertexId v = 0; v < m.vertices.size(); ++v) {
            if (!m.vertices[v].alive) continue;
            if (v == tt.v[0] || v == tt.v[1] || v == tt.v[2]) continue;
            if (incircle(m.pos(tt.v[0]), m.pos(tt.v[1]), m.pos(tt.v[2]), m.pos(v)) ==
                Orientation::Positive)
                ++violations;
        }
    }
    return violations;
}

// Every input segment must be exactly covered by the alive subsegments that
// carry its parent index: they must chain from one endpoint to the other,
// with every link present in the mesh as a flagged edge.
inline bool conformity_ok(const Mesh& m, const Pslg& pslg) {
    std::vector<std::vector<SubsegId>> by_parent(pslg.segments.size());
    for (SubsegId s = 0; s < m.subsegments.size(); ++s) {
        if (!m.subsegments[s].alive) continue;
        if (m.subsegments[s].parent >= by_parent.size()) return false;
        by_parent[m.subsegments[s].parent].push_back(s);
    }
    for (std::uint32_t si = 0; si < pslg.segments.size(); ++si) {
        const auto [a, b] = pslg.segments[si];
        const auto& subs = by_parent[si];
        if (subs.empty()) return false;
        std::map<VertexId, int> degree;
        for (SubsegId s : subs) {
            TriId t;
            int e;
            if (!detail::find_edge(m, m.subsegments[s].v[0], m.subsegments[s].v[1], t, e))
                return false;
            if (m.triangles[t].seg[e] != s) return false;
            ++degree[m.subsegments[s].v[0]];
            ++degree[m.subsegments[s].v[1]];
        }
        // Path endpoints appear once, interior chain vertices twice.
        if (degree[a] != 1 || degree[b] != 1) return false;
        for (const auto& [v, d] : degree) {
            if (v != a && v != b && d != 2) return false;
            // Interior chain vertices lie on the parent segment up to the
            // rounding of repeated midpoints (exact collinearity is not
            // attainable for non-axis-aligned segments in double precision).
            if (v != a && v != b) {
                const Point2 ab = m.pos(b) - m.pos(a);
                const double off = std::abs(cross(ab, m.pos(v) - m.pos(a)));
                if (off > 1e-9 * dot(ab, ab)) return false;
            }
        }
    }
    return true;
}

// Min angle over all alive triangles, in degrees (reporting; not a predicate).
inline double min_angle_degrees(const Mesh& m) {
    double best = 180.0;
    for (const Triangle& t : m.triangles) {
        if (!t.alive) continue;
        for (int i = 0; i < 3; ++i) {
            const Point2& p = m.pos(t.v[i]);
            const Point2 u = m.pos(t.v[Mesh::next(i)]) - p;
            const Point2 v = m.pos(t.v[Mesh::prev(i)]) - p;
            const double ang =
                std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / 3.14159265358979323846;
            best = std::min(best, ang);
        }
    }
    return best;
}

} // namespace cdtref

#endif
