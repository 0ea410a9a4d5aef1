#ifndef CDTREF_MESH_HPP
#define CDTREF_MESH_HPP

// Triangle-based constrained triangulation kernel: growable vertex, triangle
// and subsegment stores with neighbor adjacency, subsegment flags and the
// flip / flop / split mutation primitives.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdtref/geometry.hpp"
#include "cdtref/predicates.hpp"

namespace cdtref {

using VertexId = std::uint32_t;
using TriId = std::uint32_t;
using SubsegId = std::uint32_t;

inline constexpr std::uint32_t kNone = 0xFFFFFFFFu;   // Boundary neighbor / no subsegment
inline constexpr std::uint32_t kPending = 0xFFFFFFFEu;

enum class VertexKind : std::uint8_t { Input, SteinerMidpoint, SteinerCircumcenter };

enum class MeshErrc {
    ConstraintEdge,
    NonConvex,
    BoundaryEdge,
    DegreeNotThree,
    ProtectedVertex,
    NotInterior,
    StaleHandle,
};

struct MeshError : std::runtime_error {
    MeshErrc code;
    MeshError(MeshErrc c, const std::string& what) : std::runtime_error(what), code(c) {}
};

struct Vertex {
    Point2 pos;
    VertexKind kind = VertexKind::Input;
    std::uint32_t birth_batch = 0;
    bool alive = true;
};

struct Triangle {
    std::array<VertexId, 3> v{kNone, kNone, kNone};
    std::array<TriId, 3> nbr{kNone, kNone, kNone};   // nbr[i] is across the edge opposite v[i]
    std::array<SubsegId, 3> seg{kNone, kNone, kNone};
    bool alive = true;
};

struct Subsegment {
    std::array<VertexId, 2> v{kNone, kNone};
    std::uint32_t parent = kNone;   // input segment index
    bool encroached = false;        // scratch flag, sticky until the subsegment is split
    bool alive = true;
};

class Mesh {
public:
    std::vector<Vertex> vertices;
    std::vector<Triangle> triangles;
    std::vector<Subsegment> subsegments;
    std::uint32_t batch_epoch = 0;

    // vert_tri[v]: some alive triangle containing v. seg_tri[s]: some alive
    // triangle carrying s on one of its edges.
    std::vector<TriId> vert_tri;
    std::vector<TriId> seg_tri;

    VertexId add_vertex(const Point2& p, VertexKind kind, std::uint32_t birth) {
        vertices.push_back({p, kind, birth, true});
        vert_tri.push_back(kNone);
        return static_cast<VertexId>(vertices.size() - 1);
    }

    TriId add_triangle(VertexId a, VertexId b, VertexId c) {
        triangles.push_back({{a, b, c}, {kNone, kNone, kNone}, {kNone, kNone, kNone}, true});
        const TriId t = static_cast<TriId>(triangles.size() - 1);
        vert_tri[a] = vert_tri[b] = vert_tri[c] = t;
        return t;
    }

    SubsegId add_subsegment(VertexId a, VertexId b, std::uint32_t parent) {
        subsegments.push_back({{a, b}, parent, false, true});
        seg_tri.push_back(kNone);
        return static_cast<SubsegId>(subsegments.size() - 1);
    }

    const Point2& pos(VertexId v) const { return vertices[v].pos; }

    static int next(int i) { return (i + 1) % 3; }
    static int prev(int i) { return (i + 2) % 3; }

    int index_of_vertex(TriId t, VertexId v) const {
        const Triangle& tri = triangles[t];
        for (int i = 0; i < 3; ++i)
            if (tri.v[i] == v) return i;
        throw MeshError(MeshErrc::StaleHandle, "vertex not in triangle");
    }

    int index_of_neighbor(TriId t, TriId u) const {
        const Triangle& tri = triangles[t];
        for (int i = 0; i < 3; ++i)
            if (tri.nbr[i] == u) return i;
        throw MeshError(MeshErrc::StaleHandle, "neighbor link missing");
    }

    // Endpoints of edge i of triangle t (the edge opposite vertex i).
    std::array<VertexId, 2> edge_vertices(TriId t, int e) const {
        const Triangle& tri = triangles[t];
        return {tri.v[next(e)], tri.v[prev(e)]};
    }

    void link(TriId t, int et, TriId u, int eu) {
        triangles[t].nbr[et] = u;
        if (u != kNone) triangles[u].nbr[eu] = t;
    }

    void set_seg(TriId t, int e, SubsegId s) {
        triangles[t].seg[e] = s;
        if (s != kNone) seg_tri[s] = t;
    }

    // Redirect the neighbor pointer in n that used to reference `from` to `to`.
    void relink_neighbor(TriId n, TriId from, TriId to) {
        if (n == kNone) return;
        triangles[n].nbr[index_of_neighbor(n, from)] = to;
    }

    Orientation tri_orientation(TriId t) const {
        const Triangle& tri = triangles[t];
        return orient2d(pos(tri.v[0]), pos(tri.v[1]), pos(tri.v[2]));
    }

    // ---- Adjacency queries -------------------------------------------------

    // All alive triangles incident to v, in rotation order. Works for hull
    // vertices by restarting the rotation in the opposite direction.
    std::vector<TriId> incident_triangles(VertexId v) const {
        std::vector<TriId> out;
        const TriId start = vert_tri[v];
        if (start == kNone || !triangles[start].alive) {
            throw MeshError(MeshErrc::StaleHandle, "vertex has no incident triangle");
        }
        TriId cur = start;
        // Rotate one way.
        while (true) {
            out.push_back(cur);
            const int i = index_of_vertex(cur, v);
            const TriId nxt = triangles[cur].nbr[next(i)];
            if (nxt == kNone) break;
            if (nxt == start) return out;   // closed fan, interior vertex
            cur = nxt;
        }
        // Hit the hull; rotate the other way from start.
        cur = start;
        while (true) {
            const int i = index_of_vertex(cur, v);
            const TriId nxt = triangles[cur].nbr[prev(i)];
            if (nxt == kNone) break;
            out.push_back(nxt);
            cur = nxt;
        }
        return out;
    }

    bool on_hull(VertexId v) const {
        for (TriId t : incident_triangles(v)) {
            const int i = index_of_vertex(t, v);
            if (triangles[t].nbr[next(i)] == kNone || triangles[t].nbr[prev(i)] == kNone)
                return true;
        }
        return false;
    }

    // Number of mesh edges incident to v.
    std::size_t vertex_degree(VertexId v) const {
        const auto tris = incident_triangles(v);
        std::size_t deg = tris.size();
        // A hull vertex has one more incident edge than incident triangles.
        for (TriId t : tris) {
            const int i = index_of_vertex(t, v);
            if (triangles[t].nbr[next(i)] == kNone || triangles[t].nbr[prev(i)] == kNone) {
                ++deg;
                break;
            }
        }
        return deg;
    }

    bool has_incident_subsegment(VertexId v) const {
        for (TriId t : incident_triangles(v)) {
            const int i = index_of_vertex(t, v);
            if (triangles[t].seg[next(i)] != kNone || triangles[t].seg[prev(i)] != kNone)
                return true;
        }
        return false;
    }

    // ---- Mutations ---------------------------------------------------------

    // Flip edge e of t. The shared edge (b,c) is replaced by the opposite
    // diagonal (a,d). Returns the two rewritten triangles.
    std::pair<TriId, TriId> flip(TriId t, int e) {
        Triangle& tt = triangles[t];
        if (tt.seg[e] != kNone)
            throw MeshError(MeshErrc::ConstraintEdge, "cannot flip subsegment edge");
        const TriId u = tt.nbr[e];
        if (u == kNone) throw MeshError(MeshErrc::BoundaryEdge, "cannot flip hull edge");

        const VertexId a = tt.v[e];
        const VertexId b = tt.v[next(e)];
        const VertexId c = tt.v[prev(e)];
        const int f = index_of_neighbor(u, t);
        const VertexId d = triangles[u].v[f];

        if (orient2d(pos(a), pos(b), pos(d)) != Orientation::Positive ||
            orient2d(pos(a), pos(d), pos(c)) != Orientation::Positive)
            throw MeshError(MeshErrc::NonConvex, "flip would invert a triangle");

        // Outer edges of the quad with their neighbors and seg flags.
        const TriId n_ab = tt.nbr[prev(e)];
        const SubsegId s_ab = tt.seg[prev(e)];
        const TriId n_ca = tt.nbr[next(e)];
        const SubsegId s_ca = tt.seg[next(e)];
        const TriId n_bd = triangles[u].nbr[next(f)];
        const SubsegId s_bd = triangles[u].seg[next(f)];
        const TriId n_dc = triangles[u].nbr[prev(f)];
        const SubsegId s_dc = triangles[u].seg[prev(f)];

        // t := (a, b, d), u := (a, d, c)
        tt.v = {a, b, d};
        tt.nbr = {n_bd, u, n_ab};
        tt.seg = {kNone, kNone, kNone};
        triangles[u].v = {a, d, c};
        triangles[u].nbr = {n_dc, n_ca, t};
        triangles[u].seg = {kNone, kNone, kNone};

        set_seg(t, 0, s_bd);
        set_seg(t, 2, s_ab);
        set_seg(u, 0, s_dc);
        set_seg(u, 1, s_ca);

        relink_neighbor(n_bd, u, t);
        relink_neighbor(n_ca, t, u);

        vert_tri[a] = t;
        vert_tri[b] = t;
        vert_tri[d] = t;
        vert_tri[c] = u;
        return {t, u};
    }

    // Remove degree-3 vertex a by merging its three incident triangles.
    TriId flop(VertexId a) {
        if (vertices[a].kind == VertexKind::Input)
            throw MeshError(MeshErrc::ProtectedVertex, "flop on input vertex");
        const auto tris = incident_triangles(a);
        if (tris.size() != 3 || on_hull(a))
            throw MeshError(MeshErrc::DegreeNotThree, "flop requires interior degree-3 vertex");
        if (has_incident_subsegment(a))
            throw MeshError(MeshErrc::ProtectedVertex, "flop on subsegment-incident vertex");

        // tris are in rotation order around a: t0=(a,b,c), t1=(a,c,d), t2=(a,d,b)
        // up to rotation of each triangle's indices.
        const TriId t0 = tris[0], t1 = tris[1], t2 = tris[2];
        const int i0 = index_of_vertex(t0, a);
        const VertexId b = triangles[t0].v[next(i0)];
        const VertexId c = triangles[t0].v[prev(i0)];
        const int i1 = index_of_vertex(t1, c);   // t1 contains (a, c, d)
        const VertexId d = triangles[t1].v[next(i1)] == a ? triangles[t1].v[prev(i1)]
                                                          : triangles[t1].v[next(i1)];

        auto outer = [&](TriId t) {
            const int i = index_of_vertex(t, a);
            return std::pair{triangles[t].nbr[i], triangles[t].seg[i]};
        };
        const auto [n_bc, s_bc] = outer(t0);
        const auto [n_cd, s_cd] = outer(t1);
        const auto [n_db, s_db] = outer(t2);

        Triangle& nt = triangles[t0];
        nt.v = {b, c, d};
        nt.nbr = {n_cd, n_db, n_bc};
        nt.seg = {kNone, kNone, kNone};
        set_seg(t0, 0, s_cd);
        set_seg(t0, 1, s_db);
        set_seg(t0, 2, s_bc);
        relink_neighbor(n_cd, t1, t0);
        relink_neighbor(n_db, t2, t0);

        triangles[t1].alive = false;
        triangles[t2].alive = false;
        vertices[a].alive = false;
        vert_tri[a] = kNone;
        vert_tri[b] = vert_tri[c] = vert_tri[d] = t0;
        return t0;
    }

    // Insert p strictly inside t; 1 -> 3 split.
    VertexId split_triangle(TriId t, const Point2& p, VertexKind kind, std::uint32_t birth) {
        require_interior(t, p);
        const VertexId w = add_vertex(p, kind, birth);
        split_triangle_with(t, w);
        return w;
    }

    void require_interior(TriId t, const Point2& p) const {
        for (int i = 0; i < 3; ++i) {
            const auto [x, y] = edge_vertices(t, i);
            if (orient2d(pos(x), pos(y), p) != Orientation::Positive)
                throw MeshError(MeshErrc::NotInterior, "split point not strictly inside");
        }
    }

    // 1 -> 3 split reusing a pre-existing vertex w (construction path).
    void split_triangle_with(TriId t, VertexId w) {
        const Triangle old = triangles[t];
        const VertexId a = old.v[0], b = old.v[1], c = old.v[2];

        // t := (a,b,w), t1 := (b,c,w), t2 := (c,a,w)
        triangles[t].v = {a, b, w};
        const TriId t1 = add_triangle(b, c, w);
        const TriId t2 = add_triangle(c, a, w);

        triangles[t].nbr = {t1, t2, old.nbr[2]};
        triangles[t].seg = {kNone, kNone, kNone};
        set_seg(t, 2, old.seg[2]);
        triangles[t1].nbr = {t2, t, old.nbr[0]};
        set_seg(t1, 2, old.seg[0]);
        triangles[t2].nbr = {t, t1, old.nbr[1]};
        set_seg(t2, 2, old.seg[1]);

        relink_neighbor(old.nbr[0], t, t1);
        relink_neighbor(old.nbr[1], t, t2);
        vert_tri[a] = t;
        vert_tri[b] = t;
        vert_tri[c] = t1;
        vert_tri[w] = t;
    }

    // Insert p on edge e of t; each incident triangle splits 1 -> 2. When the
    // edge is a subsegment the caller passes the two child subsegment ids
    // (first child on the (b,w) half, second on (w,c)), otherwise kNone.
    VertexId split_edge(TriId t, int e, const Point2& p, VertexKind kind, std::uint32_t birth,
                        SubsegId s_bw = kNone, SubsegId s_wc = kNone) {
        const VertexId w = add_vertex(p, kind, birth);
        split_edge_with(t, e, w, s_bw, s_wc);
        return w;
    }

    void split_edge_with(TriId t, int e, VertexId w, SubsegId s_bw = kNone,
                         SubsegId s_wc = kNone) {
        const Triangle old_t = triangles[t];
        const VertexId a = old_t.v[e];
        const VertexId b = old_t.v[next(e)];
        const VertexId c = old_t.v[prev(e)];
        const TriId u = old_t.nbr[e];

        // t := (a,b,w), t2 := (a,w,c)
        triangles[t].v = {a, b, w};
        const TriId t2 = add_triangle(a, w, c);
        triangles[t].nbr = {kNone, t2, old_t.nbr[prev(e)]};
        triangles[t].seg = {kNone, kNone, kNone};
        set_seg(t, 2, old_t.seg[prev(e)]);
        set_seg(t, 0, s_bw);
        triangles[t2].nbr = {kNone, old_t.nbr[next(e)], t};
        set_seg(t2, 1, old_t.seg[next(e)]);
        set_seg(t2, 0, s_wc);
        relink_neighbor(old_t.nbr[next(e)], t, t2);

        if (u != kNone) {
            const Triangle old_u = triangles[u];
            const int f = index_of_neighbor(u, t);
            const VertexId d = old_u.v[f];
            // u := (d,c,w), u2 := (d,w,b)
            triangles[u].v = {d, c, w};
            const TriId u2 = add_triangle(d, w, b);
            triangles[u].nbr = {t2, u2, old_u.nbr[prev(f)]};
            triangles[u].seg = {kNone, kNone, kNone};
            set_seg(u, 2, old_u.seg[prev(f)]);
            set_seg(u, 0, s_wc);
            triangles[u2].nbr = {t, old_u.nbr[next(f)], u};
            set_seg(u2, 1, old_u.seg[next(f)]);
            set_seg(u2, 0, s_bw);
            relink_neighbor(old_u.nbr[next(f)], u, u2);
            triangles[t].nbr[0] = u2;
            triangles[t2].nbr[0] = u;
            vert_tri[d] = u;
        }
        vert_tri[a] = t;
        vert_tri[b] = t;
        vert_tri[c] = t2;
        vert_tri[w] = t;
    }

    // Split subsegment s at its midpoint. Returns the new vertex; the two
    // children inherit s's parent segment.
    VertexId split_subsegment(SubsegId s, const Point2& p, std::uint32_t birth) {
        if (!subsegments[s].alive)
            throw MeshError(MeshErrc::StaleHandle, "split of dead subsegment");
        const std::uint32_t parent = subsegments[s].parent;   // copy: adds reallocate
        const TriId t = seg_tri[s];
        int e = -1;
        for (int i = 0; i < 3; ++i)
            if (triangles[t].seg[i] == s) e = i;
        if (e < 0) throw MeshError(MeshErrc::StaleHandle, "seg_tri out of date");

        const VertexId b = triangles[t].v[next(e)];
        const VertexId c = triangles[t].v[prev(e)];
        // Children ordered to match the (b,w) / (w,c) halves of split_edge.
        const SubsegId s_bw = add_subsegment(b, kNone, parent);
        const SubsegId s_wc = add_subsegment(kNone, c, parent);
        const VertexId w = split_edge(t, e, p, VertexKind::SteinerMidpoint, birth, s_bw, s_wc);
        subsegments[s_bw].v[1] = w;
        subsegments[s_wc].v[0] = w;
        subsegments[s].alive = false;
        return w;
    }

    // True iff the two triangles across edge e of t fail the local Delaunay
    // test (opposite angle sum strictly greater than pi). Hull and subsegment
    // edges are never reported.
    bool is_non_delaunay_edge(TriId t, int e) const {
        const Triangle& tt = triangles[t];
        if (tt.seg[e] != kNone || tt.nbr[e] == kNone) return false;
        const TriId u = tt.nbr[e];
        const int f = index_of_neighbor(u, t);
        const VertexId d = triangles[u].v[f];
        return incircle(pos(tt.v[0]), pos(tt.v[1]), pos(tt.v[2]), pos(d)) == Orientation::Positive;
    }

    // Reduce a free interior vertex to degree 3 with flips, then flop it away.
    // Returns false if no flippable incident edge could be found (does not
    // happen for interior vertices of a valid triangulation).
    bool remove_free_vertex(VertexId a) {
        std::size_t guard = 0;
        while (vertex_degree(a) > 3) {
            if (++guard > 64 + 4 * vertices.size()) return false;
            bool flipped = false;
            for (TriId t : incident_triangles(a)) {
                const int i = index_of_vertex(t, a);
                // Edges incident to a within t are next(i) and prev(i).
                for (int e : {next(i), prev(i)}) {
                    if (triangles[t].seg[e] != kNone || triangles[t].nbr[e] == kNone) continue;
                    try {
                        flip(t, e);
                        flipped = true;
                        break;
                    } catch (const MeshError&) {
                        // NonConvex here; try another incident edge.
                    }
                }
                if (flipped) break;
            }
            if (!flipped) return false;
        }
        flop(a);
        return true;
    }

    // ---- Whole-mesh checks (debug / test support) --------------------------

    std::size_t alive_vertex_count() const {
        std::size_t n = 0;
        for (const auto& v : vertices) n += v.alive;
        return n;
    }
    std::size_t alive_triangle_count() const {
        std::size_t n = 0;
        for (const auto& t : triangles) n += t.alive;
        return n;
    }
    std::size_t alive_subsegment_count() const {
        std::size_t n = 0;
        for (const auto& s : subsegments) n += s.alive;
        return n;
    }
    std::size_t hull_vertex_count() const {
        std::vector<bool> seen(vertices.size(), false);
        std::size_t n = 0;
        for (TriId t = 0; t < triangles.size(); ++t) {
            if (!triangles[t].alive) continue;
            for (int e = 0; e < 3; ++e) {
                if (triangles[t].nbr[e] != kNone) continue;
                for (VertexId v : edge_vertices(t, e)) {
                    if (!seen[v]) {
                        seen[v] = true;
                        ++n;
                    }
                }
            }
        }
        return n;
    }

    // Throws MeshError on any structural violation; used by tests and by the
    // post-run verification pass.
    void check_structure() const {
        for (TriId t = 0; t < triangles.size(); ++t) {
            const Triangle& tt = triangles[t];
            if (!tt.alive) continue;
            if (tri_orientation(t) != Orientation::Positive)
                throw MeshError(MeshErrc::NonConvex, "non-CCW triangle " + std::to_string(t));
            for (int e = 0; e < 3; ++e) {
                const TriId u = tt.nbr[e];
                if (u != kNone) {
                    if (!triangles[u].alive)
                        throw MeshError(MeshErrc::StaleHandle, "dead neighbor");
                    const int f = index_of_neighbor(u, t);
                    const auto et = edge_vertices(t, e);
                    const auto eu = edge_vertices(u, f);
                    if (!(et[0] == eu[1] && et[1] == eu[0]))
                        throw MeshError(MeshErrc::StaleHandle, "neighbor edge mismatch");
                    if (tt.seg[e] != triangles[u].seg[f])
                        throw MeshError(MeshErrc::StaleHandle, "seg flag asymmetry");
                }
                const SubsegId s = tt.seg[e];
                if (s != kNone) {
                    if (!subsegments[s].alive)
                        throw MeshError(MeshErrc::StaleHandle, "dead subsegment flagged");
                    const auto ev = edge_vertices(t, e);
                    const auto sv = subsegments[s].v;
                    if (!((ev[0] == sv[0] && ev[1] == sv[1]) || (ev[0] == sv[1] && ev[1] == sv[0])))
                        throw MeshError(MeshErrc::StaleHandle, "subsegment endpoints mismatch");
                }
            }
        }
        for (VertexId v = 0; v < vertices.size(); ++v) {
            if (!vertices[v].alive) continue;
            const TriId t = vert_tri[v];
            if (t == kNone || !triangles[t].alive)
                throw MeshError(MeshErrc::StaleHandle, "vert_tri stale");
            index_of_vertex(t, v);
        }
        for (SubsegId s = 0; s < subsegments.size(); ++s) {
            if (!subsegments[s].alive) continue;
            const TriId t = seg_tri[s];
            if (t == kNone || !triangles[t].alive)
                throw MeshError(MeshErrc::StaleHandle, "seg_tri stale");
            bool found = false;
            for (int e = 0; e < 3; ++e) found = found || triangles[t].seg[e] == s;
            if (!found) throw MeshError(MeshErrc::StaleHandle, "seg_tri edge missing");
        }
    }

    bool euler_holds() const {
        const std::size_t v = alive_vertex_count();
        const std::size_t h = hull_vertex_count();
        return alive_triangle_count() == 2 * v - h - 2;
    }
};

} // namespace cdtref

#endif
