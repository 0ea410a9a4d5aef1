#ifndef CDTREF_CDT_HPP
#define CDTREF_CDT_HPP

// Initial constrained Delaunay triangulation: incremental insertion with
// walking point location, hull extension for points outside the current hull,
// Lawson flip legalization, and segment recovery by flipping crossed edges.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <stdexcept>
#include <vector>

#include "cdtref/mesh.hpp"

namespace cdtref {

struct Pslg {
    std::vector<Point2> points;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> segments;
};

struct CdtError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- Point location --------------------------------------------------------

struct Location {
    enum class Kind { Inside, OnEdge, OnVertex, OutsideHull, Intercepted } kind;
    TriId tri = kNone;
    int edge = -1;
    VertexId vert = kNone;
    SubsegId seg = kNone;
    std::size_t steps = 0;
};

namespace detail {

inline Location classify_in_triangle(const Mesh& m, TriId t, const Point2& p) {
    int zero_edge = -1;
    int zero_count = 0;
    for (int e = 0; e < 3; ++e) {
        const auto [x, y] = m.edge_vertices(t, e);
        const Orientation o = orient2d(m.pos(x), m.pos(y), p);
        if (o == Orientation::Negative) return {Location::Kind::OutsideHull, t, e};
        if (o == Orientation::Zero) {
            zero_edge = e;
            ++zero_count;
        }
    }
    if (zero_count == 0) return {Location::Kind::Inside, t};
    if (zero_count == 1) return {Location::Kind::OnEdge, t, zero_edge};
    for (int i = 0; i < 3; ++i) {
        if (m.pos(m.triangles[t].v[i]) == p)
            return {Location::Kind::OnVertex, t, -1, m.triangles[t].v[i]};
    }
    return {Location::Kind::OnVertex, t, -1, m.triangles[t].v[0]};
}

} // namespace detail

// Visibility walk from start toward p. When intercept_subsegments is set, the
// walk stops at the first subsegment edge it would have to cross and reports
// it as Intercepted. Falls back to an exhaustive scan if the walk does not
// settle (degenerate configurations).
inline Location locate_point(const Mesh& m, TriId start, const Point2& p,
                             bool intercept_subsegments = false) {
    TriId cur = start;
    TriId prev = kNone;
    const std::size_t cap = 8 + 2 * m.triangles.size();
    for (std::size_t step = 0; step < cap; ++step) {
        int exit_edge = -1;
        for (int e = 0; e < 3; ++e) {
            if (m.triangles[cur].nbr[e] == prev && prev != kNone) continue;
            const auto [x, y] = m.edge_vertices(cur, e);
            if (orient2d(m.pos(x), m.pos(y), p) == Orientation::Negative) {
                exit_edge = e;
                break;
            }
        }
        if (exit_edge < 0) {
            Location loc = detail::classify_in_triangle(m, cur, p);
            loc.steps = step;
            if (loc.kind != Location::Kind::OutsideHull) return loc;
            exit_edge = loc.edge;   // blocked by the remembered edge; cross it
        }
        if (intercept_subsegments && m.triangles[cur].seg[exit_edge] != kNone) {
            return {Location::Kind::Intercepted, cur, exit_edge, kNone,
                    m.triangles[cur].seg[exit_edge], step};
        }
        const TriId nxt = m.triangles[cur].nbr[exit_edge];
        if (nxt == kNone) return {Location::Kind::OutsideHull, cur, exit_edge, kNone, kNone, step};
        prev = cur;
        cur = nxt;
    }
    // Exhaustive fallback; no interception information available here.
    for (TriId t = 0; t < m.triangles.size(); ++t) {
        if (!m.triangles[t].alive) continue;
        Location loc = detail::classify_in_triangle(m, t, p);
        if (loc.kind != Location::Kind::OutsideHull) return loc;
    }
    return {Location::Kind::OutsideHull, cur, 0};
}

// ---- Lawson fixpoint -------------------------------------------------------

// Flip non-Delaunay, non-subsegment edges until none remain, starting from the
// seed edges and following the wake of each flip.
inline void lawson_fixpoint(Mesh& m, std::deque<std::pair<TriId, int>> work) {
    while (!work.empty()) {
        const auto [t, e] = work.front();
        work.pop_front();
        if (t >= m.triangles.size() || !m.triangles[t].alive) continue;
        if (!m.is_non_delaunay_edge(t, e)) continue;
        const auto [nt, nu] = m.flip(t, e);
        for (int i = 0; i < 3; ++i) {
            work.emplace_back(nt, i);
            work.emplace_back(nu, i);
        }
    }
}

inline void lawson_fixpoint_all(Mesh& m) {
    std::deque<std::pair<TriId, int>> work;
    for (TriId t = 0; t < m.triangles.size(); ++t) {
        if (!m.triangles[t].alive) continue;
        for (int e = 0; e < 3; ++e) work.emplace_back(t, e);
    }
    lawson_fixpoint(m, std::move(work));
}

// ---- Incremental Delaunay construction -------------------------------------

namespace detail {

// Next hull edge counterclockwise: rotate around the far endpoint of hull edge
// (t,e) until the next boundary edge appears.
inline std::pair<TriId, int> hull_next(const Mesh& m, TriId t, int e) {
    const VertexId pivot = m.triangles[t].v[Mesh::prev(e)];
    TriId cur = t;
    while (true) {
        const int i = m.index_of_vertex(cur, pivot);
        const int cand = Mesh::prev(i);   // edge directed away from pivot
        const TriId nxt = m.triangles[cur].nbr[cand];
        if (nxt == kNone) return {cur, cand};
        cur = nxt;
    }
}

inline std::pair<TriId, int> hull_prev(const Mesh& m, TriId t, int e) {
    const VertexId pivot = m.triangles[t].v[Mesh::next(e)];
    TriId cur = t;
    while (true) {
        const int i = m.index_of_vertex(cur, pivot);
        const int cand = Mesh::next(i);   // edge directed into pivot
        const TriId nxt = m.triangles[cur].nbr[cand];
        if (nxt == kNone) return {cur, cand};
        cur = nxt;
    }
}

inline bool hull_edge_visible(const Mesh& m, TriId t, int e, const Point2& p) {
    const auto [x, y] = m.edge_vertices(t, e);
    return orient2d(m.pos(x), m.pos(y), p) == Orientation::Negative;
}

// Attach vertex w outside the hull with a fan over all hull edges visible from
// it, starting from the known-visible hull edge (t,e).
inline void extend_hull(Mesh& m, TriId t, int e, VertexId w) {
    const Point2 p = m.pos(w);
    std::vector<std::pair<TriId, int>> edges{{t, e}};
    for (auto cur = hull_next(m, t, e); hull_edge_visible(m, cur.first, cur.second, p);
         cur = hull_next(m, cur.first, cur.second)) {
        edges.push_back(cur);
    }
    for (auto cur = hull_prev(m, t, e); hull_edge_visible(m, cur.first, cur.second, p);
         cur = hull_prev(m, cur.first, cur.second)) {
        edges.insert(edges.begin(), cur);
    }
    TriId prev_fan = kNone;
    for (const auto& [ht, he] : edges) {
        const auto [x, y] = m.edge_vertices(ht, he);
        const TriId fan = m.add_triangle(y, x, w);   // CCW since p is right of (x,y)
        m.link(fan, 2, ht, he);
        m.set_seg(fan, 2, m.triangles[ht].seg[he]);
        if (prev_fan != kNone) m.link(fan, 0, prev_fan, 1);
        prev_fan = fan;
    }
}

} // namespace detail

// Delaunay triangulation of a point set by incremental insertion. Vertex i of
// the result corresponds to points[i]. Throws CdtError on all-collinear input
// or exact duplicates.
inline Mesh build_delaunay(const std::vector<Point2>& points) {
    if (points.size() < 3) throw CdtError("need at least 3 points");
    Mesh m;
    for (const Point2& p : points) {
        if (!finite(p)) throw CdtError("non-finite coordinate");
        m.add_vertex(p, VertexKind::Input, 0);
    }

    const std::size_t n = points.size();
    std::size_t i1 = 1;
    std::size_t i2 = 2;
    Orientation o = Orientation::Zero;
    while (i2 < n) {
        o = orient2d(points[0], points[i1], points[i2]);
        if (o != Orientation::Zero) break;
        ++i2;
    }
    if (i2 >= n) throw CdtError("all points collinear");
    if (o == Orientation::Positive)
        m.add_triangle(0, static_cast<VertexId>(i1), static_cast<VertexId>(i2));
    else
        m.add_triangle(0, static_cast<VertexId>(i2), static_cast<VertexId>(i1));

    TriId hint = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (i == i1 || i == i2) continue;
        const VertexId w = static_cast<VertexId>(i);
        const Location loc = locate_point(m, hint, points[i]);
        switch (loc.kind) {
            case Location::Kind::OnVertex:
                throw CdtError("duplicate point");
            case Location::Kind::Inside:
                m.require_interior(loc.tri, points[i]);
                m.split_triangle_with(loc.tri, w);
                break;
            case Location::Kind::OnEdge:
                m.split_edge_with(loc.tri, loc.edge, w);
                break;
            case Location::Kind::OutsideHull:
                detail::extend_hull(m, loc.tri, loc.edge, w);
                break;
            default:
                throw CdtError("unexpected walk result");
        }
        std::deque<std::pair<TriId, int>> legalize;
        for (TriId t : m.incident_triangles(w)) {
            for (int e = 0; e < 3; ++e) legalize.emplace_back(t, e);
        }
        lawson_fixpoint(m, std::move(legalize));
        hint = m.vert_tri[w];
    }
    return m;
}

// ---- Segment recovery ------------------------------------------------------

namespace detail {

// Find the triangle and edge index of mesh edge (u,w), if present.
inline bool find_edge(const Mesh& m, VertexId u, VertexId w, TriId& t_out, int& e_out) {
    for (TriId t : m.incident_triangles(u)) {
        const int i = m.index_of_vertex(t, u);
        if (m.triangles[t].v[Mesh::next(i)] == w) {
            t_out = t;
            e_out = Mesh::prev(i);   // edge (u, w)
            return true;
        }
        if (m.triangles[t].v[Mesh::prev(i)] == w) {
            t_out = t;
            e_out = Mesh::next(i);   // edge (w, u)
            return true;
        }
    }
    return false;
}

inline void flag_edge(Mesh& m, VertexId u, VertexId w, std::uint32_t parent) {
    TriId t;
    int e;
    if (!find_edge(m, u, w, t, e))
        throw CdtError("segment edge not present after recovery");
    if (m.triangles[t].seg[e] != kNone) return;   // already flagged (shared subsegment)
    const SubsegId s = m.add_subsegment(u, w, parent);
    m.set_seg(t, e, s);
    const TriId nb = m.triangles[t].nbr[e];
    if (nb != kNone) m.set_seg(nb, m.index_of_neighbor(nb, t), s);
}

// True iff open segments (a,b) and (c,d) properly cross.
inline bool proper_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const int o1 = static_cast<int>(orient2d(a, b, c));
    const int o2 = static_cast<int>(orient2d(a, b, d));
    const int o3 = static_cast<int>(orient2d(c, d, a));
    const int o4 = static_cast<int>(orient2d(c, d, b));
    return o1 * o2 < 0 && o3 * o4 < 0;
}

// Strictly between u and w on the segment's line (caller guarantees collinear).
inline bool strictly_between(const Point2& u, const Point2& w, const Point2& p) {
    if (p == u || p == w) return false;
    return dot(w - u, p - u) > 0.0 && dot(u - w, p - w) > 0.0;
}

struct PipeResult {
    std::deque<std::pair<VertexId, VertexId>> crossing;   // edges properly crossed
    VertexId collinear = kNone;                           // vertex on the open segment
};

// Walk the triangles pierced by the open segment (u,w), collecting every
// crossed edge, or report the first vertex found lying on the segment.
inline PipeResult collect_pipe(const Mesh& m, VertexId u, VertexId w) {
    PipeResult out;
    const Point2 pu = m.pos(u);
    const Point2 pw = m.pos(w);

    TriId t = kNone;
    VertexId x = kNone, y = kNone;   // crossed edge: x on the +side, y on the -side
    for (TriId cand : m.incident_triangles(u)) {
        const int i = m.index_of_vertex(cand, u);
        const VertexId b = m.triangles[cand].v[Mesh::next(i)];
        const VertexId c = m.triangles[cand].v[Mesh::prev(i)];
        for (VertexId v : {b, c}) {
            if (orient2d(pu, pw, m.pos(v)) == Orientation::Zero &&
                strictly_between(pu, pw, m.pos(v))) {
                out.collinear = v;
                return out;
            }
        }
        if (orient2d(pu, pw, m.pos(b)) == Orientation::Negative &&
            orient2d(pu, pw, m.pos(c)) == Orientation::Positive) {
            t = cand;
            x = c;
            y = b;
            break;
        }
    }
    if (t == kNone) throw CdtError("segment walk found no exit wedge");

    std::size_t guard = 0;
    while (true) {
        if (++guard > m.triangles.size() + 8) throw CdtError("segment pipe walk stuck");
        out.crossing.emplace_back(x, y);
        TriId tc;
        int ec;
        if (!find_edge(m, x, y, tc, ec)) throw CdtError("pipe edge vanished");
        // Exactly two triangles contain edge (x,y); step into the far one.
        const TriId tn = tc == t ? m.triangles[tc].nbr[ec] : tc;
        if (tn == kNone || tn == t) throw CdtError("segment escapes hull");
        int ef = -1;
        for (int e2 = 0; e2 < 3; ++e2) {
            const auto ev = m.edge_vertices(tn, e2);
            if ((ev[0] == x && ev[1] == y) || (ev[0] == y && ev[1] == x)) ef = e2;
        }
        if (ef < 0) throw CdtError("pipe adjacency broken");
        const VertexId d = m.triangles[tn].v[ef];
        if (d == w) return out;
        const Orientation od = orient2d(pu, pw, m.pos(d));
        if (od == Orientation::Zero) {
            if (strictly_between(pu, pw, m.pos(d))) {
                out.collinear = d;
                return out;
            }
            throw CdtError("degenerate pipe vertex");
        }
        t = tn;
        if (od == Orientation::Positive) {
            x = d;   // exit through (d, y)
        } else {
            y = d;   // exit through (x, d)
        }
    }
}

inline void recover_chain(Mesh& m, VertexId u, VertexId w, std::uint32_t parent, int depth) {
    if (depth > 256) throw CdtError("segment recovery did not converge");
    const Point2 pu = m.pos(u);
    const Point2 pw = m.pos(w);
    const std::size_t attempt_cap = 64 + m.vertices.size();
    for (std::size_t attempt = 0; attempt < attempt_cap; ++attempt) {
        {
            TriId t;
            int e;
            if (find_edge(m, u, w, t, e)) {
                flag_edge(m, u, w, parent);
                return;
            }
        }
        PipeResult pipe = collect_pipe(m, u, w);
        if (pipe.collinear != kNone) {
            recover_chain(m, u, pipe.collinear, parent, depth + 1);
            recover_chain(m, pipe.collinear, w, parent, depth + 1);
            return;
        }
        // Flip crossed edges until none crosses the segment anymore. Edges
        // are tracked by endpoints since flips invalidate (tri, index)
        // handles. A flip diagonal that still crosses goes back in the queue.
        auto& crossing = pipe.crossing;
        std::size_t guard = 0;
        const std::size_t cap = 1000 + m.triangles.size() * 8;
        bool need_restart = false;
        while (!crossing.empty() && !need_restart) {
            if (++guard > cap) throw CdtError("segment recovery loop exceeded cap");
            const auto [x, y] = crossing.front();
            crossing.pop_front();
            TriId t;
            int e;
            if (!find_edge(m, x, y, t, e)) continue;
            if (!proper_cross(pu, pw, m.pos(x), m.pos(y))) continue;
            if (m.triangles[t].seg[e] != kNone) throw CdtError("input segments cross");
            std::pair<TriId, TriId> res;
            try {
                res = m.flip(t, e);
            } catch (const MeshError& err) {
                if (err.code != MeshErrc::NonConvex) throw;
                crossing.emplace_back(x, y);   // retry after neighbors are flipped
                continue;
            }
            const VertexId a = m.triangles[res.first].v[0];
            const VertexId d = m.triangles[res.first].v[2];
            if (proper_cross(pu, pw, m.pos(a), m.pos(d))) {
                crossing.emplace_back(a, d);
            } else {
                for (VertexId v : {a, d}) {
                    if (orient2d(pu, pw, m.pos(v)) == Orientation::Zero &&
                        strictly_between(pu, pw, m.pos(v))) {
                        need_restart = true;   // a vertex sits on the segment now
                    }
                }
            }
        }
    }
    throw CdtError("segment recovery attempts exhausted");
}

} // namespace detail

// Flag (and if necessary create by flipping) every input segment as a chain of
// subsegment edges, then restore constrained Delaunayhood.
inline void recover_segments(Mesh& m, const Pslg& pslg) {
    for (std::uint32_t si = 0; si < pslg.segments.size(); ++si) {
        const auto [a, b] = pslg.segments[si];
        detail::recover_chain(m, a, b, si, 0);
    }
    lawson_fixpoint_all(m);
}

// Every convex-hull edge must be constrained or refinement walks could escape
// the triangulated domain; append any hull edge between adjacent boundary
// points (collinear ones included) that no input segment already covers.
inline Pslg close_hull(Pslg g) {
    const std::size_t n = g.points.size();
    if (n < 3) return g;
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const Point2 &p = g.points[a], &q = g.points[b];
        return p.x != q.x ? p.x < q.x : p.y < q.y;
    });
    std::vector<std::uint32_t> hull;
    auto grow = [&](std::uint32_t v, std::size_t floor) {
        while (hull.size() >= floor + 2 &&
               orient2d(g.points[hull[hull.size() - 2]], g.points[hull.back()],
                        g.points[v]) == Orientation::Negative)
            hull.pop_back();
        hull.push_back(v);
    };
    for (std::uint32_t v : order) grow(v, 0);
    const std::size_t lower = hull.size() - 1;
    for (std::size_t i = n - 1; i-- > 0;) grow(order[i], lower);
    hull.pop_back();   // closes back on the first point

    auto key = [](std::uint32_t a, std::uint32_t b) {
        if (a > b) std::swap(a, b);
        return (std::uint64_t{a} << 32) | b;
    };
    std::set<std::uint64_t> have;
    for (const auto& [a, b] : g.segments) have.insert(key(a, b));
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const std::uint32_t a = hull[i], b = hull[(i + 1) % hull.size()];
        if (have.insert(key(a, b)).second) g.segments.emplace_back(a, b);
    }
    return g;
}

// Convenience: full initial CDT of a PSLG.
inline Mesh build_cdt(const Pslg& pslg) {
    Mesh m = build_delaunay(pslg.points);
    recover_segments(m, pslg);
    return m;
}

} // namespace cdtref

#endif
