#ifndef CDTREF_REFINE_HPP
#define CDTREF_REFINE_HPP

// Batch refinement engine: collect encroached subsegments and bad triangles,
// compute splitting points, prioritize, locate with subsegment interception,
// filter by triangle claims and bounded cavity approximation, insert with
// flip-flop and redundant-point rollback. A classic sequential single-point
// Ruppert loop is provided as the Steiner-count baseline.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <thread>
#include <vector>

#include "cdtref/cdt.hpp"
#include "cdtref/expandlist.hpp"
#include "cdtref/mesh.hpp"
#include "cdtref/ruleskit.hpp"

namespace cdtref {

enum class RefineMode : std::uint8_t { Ruppert, Chew };
enum class ExecutionMode : std::uint8_t { Sequential, Parallel };

struct QualityCriteria {
    double theta = 20.0;   // degrees; termination guaranteed up to ~29
    double ell = std::numeric_limits<double>::infinity();
    RefineMode mode = RefineMode::Ruppert;
};

struct EngineConfig {
    ExecutionMode execution = ExecutionMode::Sequential;
    unsigned executor_count = 1;
    std::size_t cavity_n = 32;
    RuleFlags rules;
    std::size_t iteration_cap = 10000;
    std::size_t split_depth_cap = 64;
    std::size_t batch_size_cap = 0;   // 0 = unlimited
    std::uint64_t seed = 0;

    CompactionPolicy compaction() const {
        CompactionPolicy p;
        p.threshold = rules.rule1_compaction_threshold;
        return p;
    }
    unsigned executors() const {
        return execution == ExecutionMode::Parallel ? std::max(1u, executor_count) : 1u;
    }
};

struct PriorityKey {
    enum class Band : std::uint8_t { Circumcenter = 0, Midpoint = 1 };
    Band band = Band::Circumcenter;
    double measure = 0.0;        // subsegment length or triangle area
    std::uint32_t tiebreak = 0;  // candidate index; lower wins ties
};

// Strict total order; every Midpoint outranks every Circumcenter.
inline bool priority_less(const PriorityKey& a, const PriorityKey& b) {
    if (a.band != b.band) return static_cast<int>(a.band) < static_cast<int>(b.band);
    if (a.measure != b.measure) return a.measure < b.measure;
    return a.tiebreak > b.tiebreak;
}

struct SplitCandidate {
    enum class Kind : std::uint8_t { Subseg, Tri } kind = Kind::Tri;
    std::uint32_t id = kNone;    // SubsegId or TriId
    Point2 point{};
    PriorityKey priority{};
    TriId located = kPending;
    bool alive = true;
};

struct BatchOutcome {
    std::size_t inserted_midpoints = 0;
    std::size_t inserted_circumcenters = 0;
    std::size_t removed_redundant = 0;   // circumcenter encroached a subsegment
    std::size_t removed_dependent = 0;   // same-batch circumcenter pair edge
    std::size_t dropped = 0;             // stale, duplicate, escaped, depth-capped
    std::size_t marked_encroached = 0;   // subsegments queued for the next batch
    std::size_t degenerate_fallbacks = 0;

    std::size_t inserted() const { return inserted_midpoints + inserted_circumcenters; }
    std::size_t retained() const {
        return inserted() - removed_redundant - removed_dependent;
    }
};

namespace detail {

template <class Fn>
inline void parallel_for(std::size_t n, unsigned executors, Fn&& fn) {
    if (executors <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + executors - 1) / executors;
    for (unsigned x = 0; x < executors; ++x) {
        const std::size_t lo = x * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline double triangle_area(const Mesh& m, TriId t) {
    const Triangle& tt = m.triangles[t];
    return 0.5 * std::abs(cross(m.pos(tt.v[1]) - m.pos(tt.v[0]), m.pos(tt.v[2]) - m.pos(tt.v[0])));
}

inline double subsegment_length(const Mesh& m, SubsegId s) {
    return distance(m.pos(m.subsegments[s].v[0]), m.pos(m.subsegments[s].v[1]));
}

// Apexes of the (<=2) triangles incident to subsegment s.
inline std::array<VertexId, 2> subsegment_apexes(const Mesh& m, SubsegId s) {
    std::array<VertexId, 2> out{kNone, kNone};
    const TriId t = m.seg_tri[s];
    for (int e = 0; e < 3; ++e) {
        if (m.triangles[t].seg[e] != s) continue;
        out[0] = m.triangles[t].v[e];
        const TriId u = m.triangles[t].nbr[e];
        if (u != kNone) out[1] = m.triangles[u].v[m.index_of_neighbor(u, t)];
        break;
    }
    return out;
}

// Splitting s at p must leave all four child triangles positively oriented.
// Near the precision floor (chains approaching one ulp) the rounded midpoint
// can coincide with an endpoint or land on the wrong side of a sliver apex;
// such subsegments are unsplittable and their chains are abandoned.
inline bool subsegment_split_ok(const Mesh& m, SubsegId s, const Point2& p) {
    const Point2& b = m.pos(m.subsegments[s].v[0]);
    const Point2& c = m.pos(m.subsegments[s].v[1]);
    if (p == b || p == c) return false;
    auto side_ok = [&](TriId t) {
        if (t == kNone) return true;
        for (int e = 0; e < 3; ++e) {
            if (m.triangles[t].seg[e] != s) continue;
            const Point2& a = m.pos(m.triangles[t].v[e]);
            const Point2& x = m.pos(m.triangles[t].v[Mesh::next(e)]);
            const Point2& y = m.pos(m.triangles[t].v[Mesh::prev(e)]);
            return orient2d(x, p, a) == Orientation::Positive &&
                   orient2d(p, y, a) == Orientation::Positive;
        }
        return true;
    };
    const TriId t = m.seg_tri[s];
    TriId u = kNone;
    for (int e = 0; e < 3; ++e)
        if (m.triangles[t].seg[e] == s) u = m.triangles[t].nbr[e];
    return side_ok(t) && side_ok(u);
}

// A triangle whose longest edge is within a hair of its coordinate magnitude
// cannot be improved by splitting (its circumcenter is indistinguishable from
// its corners); refinement leaves it alone rather than churn at the floor.
inline bool triangle_resolvable(const Mesh& m, TriId t) {
    double mag = 0.0, len2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Point2& p = m.pos(m.triangles[t].v[i]);
        mag = std::max({mag, std::abs(p.x), std::abs(p.y)});
        len2 = std::max(len2, squared_distance(p, m.pos(m.triangles[t].v[Mesh::next(i)])));
    }
    const double floor = mag * 1e-12;
    return len2 > floor * floor;
}

inline bool point_encroaches(const Mesh& m, SubsegId s, const Point2& p, RefineMode mode) {
    const Point2& sa = m.pos(m.subsegments[s].v[0]);
    const Point2& sb = m.pos(m.subsegments[s].v[1]);
    return mode == RefineMode::Ruppert ? in_diametric_circle(sa, sb, p)
                                       : in_diametral_lens(sa, sb, p);
}

} // namespace detail

// Min-angle / max-edge quality test. Angles are compared through squared
// cosines (no arccos): for theta < 90, angle < theta iff the corner's dot
// product is positive and dot^2 > cos^2(theta) |u|^2 |v|^2.
inline bool is_bad_triangle(const Mesh& m, TriId t, const QualityCriteria& q) {
    const Triangle& tt = m.triangles[t];
    const double ell2 = q.ell * q.ell;
    const double c = std::cos(q.theta * 3.14159265358979323846 / 180.0);
    const double c2 = c * c;
    for (int i = 0; i < 3; ++i) {
        const Point2& p = m.pos(tt.v[i]);
        const Point2 u = m.pos(tt.v[Mesh::next(i)]) - p;
        const Point2 v = m.pos(tt.v[Mesh::prev(i)]) - p;
        if (std::isfinite(q.ell) && dot(u, u) > ell2) return true;
        const double d = dot(u, v);
        if (d > 0.0 && d * d > c2 * dot(u, u) * dot(v, v)) return true;
    }
    return false;
}

// Encroachment test against the apexes of the incident triangles (sufficient
// in a CDT) plus any registered pending splitting points.
inline bool is_encroached(const Mesh& m, SubsegId s, RefineMode mode,
                          const std::vector<Point2>* pending = nullptr) {
    for (VertexId apex : detail::subsegment_apexes(m, s)) {
        if (apex == kNone) continue;
        if (detail::point_encroaches(m, s, m.pos(apex), mode)) return true;
    }
    if (pending) {
        for (const Point2& p : *pending)
            if (detail::point_encroaches(m, s, p, mode)) return true;
    }
    return false;
}

// One candidate per encroached (or force-marked) subsegment and per bad
// triangle. Unified list under Rule 4; with the rule disabled, subsegment
// candidates form their own batch and triangles wait.
inline std::vector<SplitCandidate> collect(const Mesh& m, const QualityCriteria& q,
                                           const EngineConfig& cfg) {
    std::vector<SplitCandidate> out;
    for (SubsegId s = 0; s < m.subsegments.size(); ++s) {
        if (!m.subsegments[s].alive) continue;
        if (!m.subsegments[s].encroached && !is_encroached(m, s, q.mode)) continue;
        SplitCandidate c;
        c.kind = SplitCandidate::Kind::Subseg;
        c.id = s;
        c.priority = {PriorityKey::Band::Midpoint, detail::subsegment_length(m, s),
                      static_cast<std::uint32_t>(out.size())};
        out.push_back(c);
    }
    const bool subseg_batch = !cfg.rules.rule4_unified_collection && !out.empty();
    if (!subseg_batch) {
        for (TriId t = 0; t < m.triangles.size(); ++t) {
            if (!m.triangles[t].alive || !is_bad_triangle(m, t, q)) continue;
            if (!detail::triangle_resolvable(m, t)) continue;
            SplitCandidate c;
            c.kind = SplitCandidate::Kind::Tri;
            c.id = t;
            c.priority = {PriorityKey::Band::Circumcenter, detail::triangle_area(m, t),
                          static_cast<std::uint32_t>(out.size())};
            out.push_back(c);
        }
    }
    if (cfg.batch_size_cap > 0 && out.size() > cfg.batch_size_cap) {
        // Overflow policy: keep the highest priorities.
        std::sort(out.begin(), out.end(), [](const SplitCandidate& a, const SplitCandidate& b) {
            return priority_less(b.priority, a.priority);
        });
        out.resize(cfg.batch_size_cap);
        std::sort(out.begin(), out.end(), [](const SplitCandidate& a, const SplitCandidate& b) {
            return a.priority.tiebreak < b.priority.tiebreak;
        });
    }
    return out;
}

// Midpoints for subsegments, circumcenters for triangles; ill-conditioned
// circumcenters fall back to the midpoint of the longest edge (counted).
inline std::size_t compute_splitting_points(const Mesh& m, std::vector<SplitCandidate>& list) {
    std::size_t fallbacks = 0;
    for (SplitCandidate& c : list) {
        if (!c.alive) continue;
        if (c.kind == SplitCandidate::Kind::Subseg) {
            c.point = midpoint(m.pos(m.subsegments[c.id].v[0]), m.pos(m.subsegments[c.id].v[1]));
            continue;
        }
        const Triangle& tt = m.triangles[c.id];
        const auto cc = circumcenter(m.pos(tt.v[0]), m.pos(tt.v[1]), m.pos(tt.v[2]));
        if (cc.well_conditioned && finite(cc.center)) {
            c.point = cc.center;
        } else {
            ++fallbacks;
            int best = 0;
            double best_len = -1.0;
            for (int e = 0; e < 3; ++e) {
                const auto [x, y] = m.edge_vertices(c.id, e);
                const double len = squared_distance(m.pos(x), m.pos(y));
                if (len > best_len) {
                    best_len = len;
                    best = e;
                }
            }
            const auto [x, y] = m.edge_vertices(c.id, best);
            c.point = midpoint(m.pos(x), m.pos(y));
        }
    }
    return fallbacks;
}

// Walk each candidate's point into the mesh. A circumcenter whose straight
// path crosses a subsegment is rewritten to that subsegment's midpoint
// (interception); one escaping the hull or landing on a vertex is dropped.
inline void locate(const Mesh& m, SplitCandidate& c) {
    if (!c.alive) return;
    if (c.kind == SplitCandidate::Kind::Subseg) {
        c.located = m.seg_tri[c.id];
        return;
    }
    const Location loc = locate_point(m, c.id, c.point, true);
    SubsegId hit = kNone;
    switch (loc.kind) {
        case Location::Kind::Inside:
            c.located = loc.tri;
            return;
        case Location::Kind::OnEdge:
            if (m.triangles[loc.tri].seg[loc.edge] == kNone) {
                c.located = loc.tri;
                return;
            }
            hit = m.triangles[loc.tri].seg[loc.edge];
            break;
        case Location::Kind::Intercepted:
            hit = loc.seg;
            break;
        case Location::Kind::OnVertex:
        case Location::Kind::OutsideHull:
            c.alive = false;
            return;
    }
    // Interception: split the blocking subsegment instead.
    c.kind = SplitCandidate::Kind::Subseg;
    c.id = hit;
    c.point = midpoint(m.pos(m.subsegments[hit].v[0]), m.pos(m.subsegments[hit].v[1]));
    c.priority = {PriorityKey::Band::Midpoint, detail::subsegment_length(m, hit),
                  c.priority.tiebreak};
    c.located = m.seg_tri[hit];
}

namespace detail {

// Conditional-maximum claim table over triangles: a slot holds the index of
// the highest-priority candidate that touched it, regardless of the order of
// concurrent updates.
class ClaimTable {
public:
    ClaimTable(std::size_t triangles, const std::vector<SplitCandidate>& list)
        : slots_(triangles), list_(list) {
        for (auto& s : slots_) s.store(kNone, std::memory_order_relaxed);
    }

    void claim_max(TriId t, std::uint32_t cand) {
        std::uint32_t cur = slots_[t].load(std::memory_order_relaxed);
        while (cur == kNone || priority_less(list_[cur].priority, list_[cand].priority)) {
            if (slots_[t].compare_exchange_weak(cur, cand, std::memory_order_relaxed)) return;
        }
    }

    std::uint32_t owner(TriId t) const { return slots_[t].load(std::memory_order_relaxed); }

private:
    std::vector<std::atomic<std::uint32_t>> slots_;
    const std::vector<SplitCandidate>& list_;
};

} // namespace detail

// At most one splitting point per triangle: losers of the located-triangle
// claim are invalidated.
inline void claim_filter(const Mesh& m, std::vector<SplitCandidate>& list,
                         unsigned executors = 1) {
    detail::ClaimTable claims(m.triangles.size(), list);
    detail::parallel_for(list.size(), executors, [&](std::size_t i) {
        if (list[i].alive) claims.claim_max(list[i].located, static_cast<std::uint32_t>(i));
    });
    detail::parallel_for(list.size(), executors, [&](std::size_t i) {
        if (list[i].alive && claims.owner(list[i].located) != i) list[i].alive = false;
    });
}

// Cavity approximation: grow up to n neighboring triangles whose circumcircles
// enclose the candidate's point (the located triangle always belongs), claim
// each; a candidate whose region is not wholly its own is invalidated. Regions
// are geometric only, so they do not depend on executor interleaving.
inline void cavity_filter(const Mesh& m, std::vector<SplitCandidate>& list, std::size_t n,
                          const CompactionPolicy& policy, unsigned executors = 1) {
    detail::ClaimTable claims(m.triangles.size(), list);
    std::vector<std::vector<TriId>> regions(list.size());

    detail::parallel_for(list.size(), executors, [&](std::size_t i) {
        SplitCandidate& c = list[i];
        if (!c.alive) return;
        auto& region = regions[i];
        ExpandHooks<TriId> hooks;
        hooks.fanout_bound = 3;
        hooks.predicate = [&](const TriId& t) {
            if (t == c.located) return true;
            const Triangle& tt = m.triangles[t];
            return tt.alive && incircle(m.pos(tt.v[0]), m.pos(tt.v[1]), m.pos(tt.v[2]),
                                        c.point) == Orientation::Positive;
        };
        hooks.op_true = [&](TupleList<TriId>& l, std::size_t idx, Emission<TriId>& em) {
            const TriId t = l.items[idx];
            if (std::find(region.begin(), region.end(), t) != region.end()) return;
            if (region.size() > n) return;   // located + up to n neighbors
            region.push_back(t);
            claims.claim_max(t, static_cast<std::uint32_t>(i));
            for (int e = 0; e < 3; ++e) {
                if (m.triangles[t].seg[e] != kNone) continue;   // cavities stop at constraints
                const TriId nb = m.triangles[t].nbr[e];
                if (nb == kNone) continue;
                if (std::find(region.begin(), region.end(), nb) != region.end()) continue;
                em.self.push_back(nb);
            }
        };
        hooks.op_false = [](TupleList<TriId>&, std::size_t, Emission<TriId>&) {};

        TupleList<TriId> seeds;
        seeds.push(c.located);
        expand(std::move(seeds), hooks, policy);
    });

    detail::parallel_for(list.size(), executors, [&](std::size_t i) {
        if (!list[i].alive) return;
        for (TriId t : regions[i]) {
            if (claims.owner(t) != i) {
                list[i].alive = false;
                return;
            }
        }
    });
}

namespace detail {

struct InsertedVertex {
    VertexId v;
    PriorityKey priority;
    bool is_circumcenter;
    bool removed = false;
};

// Remove vertex w (a same-batch circumcenter) and restore the CDT around the
// hole left behind.
inline bool rollback_vertex(Mesh& m, VertexId w) {
    std::vector<VertexId> ring;
    for (TriId t : m.incident_triangles(w)) {
        const int i = m.index_of_vertex(t, w);
        ring.push_back(m.triangles[t].v[Mesh::next(i)]);
    }
    if (!m.remove_free_vertex(w)) return false;
    std::deque<std::pair<TriId, int>> work;
    for (VertexId v : ring) {
        for (TriId t : m.incident_triangles(v))
            for (int e = 0; e < 3; ++e) work.emplace_back(t, e);
    }
    lawson_fixpoint(m, std::move(work));
    return true;
}

} // namespace detail

// Insert every surviving candidate, legalize, then undo what the batch itself
// made redundant: circumcenters that encroach a subsegment (the subsegment is
// marked for the next batch) and the lower-priority end of any same-batch
// circumcenter pair joined by an edge.
inline BatchOutcome insert_batch(Mesh& m, std::vector<SplitCandidate>& list,
                                 const QualityCriteria& q, const EngineConfig& cfg,
                                 std::vector<std::uint32_t>& subseg_depth) {
    BatchOutcome out;
    const std::uint32_t batch = ++m.batch_epoch;

    // Queue a subsegment for the next batch -- unless its chain already hit
    // the split-depth cap, in which case re-queueing would livelock.
    auto mark_encroached = [&](SubsegId s) {
        subseg_depth.resize(m.subsegments.size(), 0);
        if (subseg_depth[s] >= cfg.split_depth_cap) return;
        const Point2 mid = midpoint(m.pos(m.subsegments[s].v[0]), m.pos(m.subsegments[s].v[1]));
        if (!detail::subsegment_split_ok(m, s, mid)) return;
        if (m.subsegments[s].encroached) return;
        m.subsegments[s].encroached = true;
        ++out.marked_encroached;
    };

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i].alive) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return priority_less(list[b].priority, list[a].priority);
    });

    std::vector<detail::InsertedVertex> fresh;
    const VertexId first_new = static_cast<VertexId>(m.vertices.size());

    // Phase 1: pure splits, no flips; stale candidates re-validate first.
    for (std::size_t i : order) {
        SplitCandidate& c = list[i];
        if (c.kind == SplitCandidate::Kind::Subseg) {
            if (!m.subsegments[c.id].alive) {
                ++out.dropped;
                continue;
            }
            subseg_depth.resize(m.subsegments.size(), 0);
            if (subseg_depth[c.id] >= cfg.split_depth_cap ||
                !detail::subsegment_split_ok(m, c.id, c.point)) {
                m.subsegments[c.id].encroached = false;   // give up on this chain
                ++out.dropped;
                continue;
            }
            const std::uint32_t depth = subseg_depth[c.id] + 1;
            m.split_subsegment(c.id, c.point, batch);
            subseg_depth.resize(m.subsegments.size(), 0);
            subseg_depth[m.subsegments.size() - 2] = depth;
            subseg_depth[m.subsegments.size() - 1] = depth;
            ++out.inserted_midpoints;
            fresh.push_back({static_cast<VertexId>(m.vertices.size() - 1), c.priority, false});
        } else {
            // The claimed triangle may have been rewritten by an earlier
            // split; re-walk from it (ids stay alive during this phase).
            const Location loc = locate_point(m, c.located, c.point, true);
            if (loc.kind == Location::Kind::Inside) {
                m.split_triangle(loc.tri, c.point, VertexKind::SteinerCircumcenter, batch);
            } else if (loc.kind == Location::Kind::OnEdge &&
                       m.triangles[loc.tri].seg[loc.edge] == kNone) {
                m.split_edge(loc.tri, loc.edge, c.point, VertexKind::SteinerCircumcenter, batch);
            } else if (loc.kind == Location::Kind::Intercepted ||
                       (loc.kind == Location::Kind::OnEdge &&
                        m.triangles[loc.tri].seg[loc.edge] != kNone)) {
                const SubsegId s =
                    loc.kind == Location::Kind::Intercepted ? loc.seg
                                                            : m.triangles[loc.tri].seg[loc.edge];
                mark_encroached(s);
                ++out.dropped;
                continue;
            } else {
                ++out.dropped;
                continue;
            }
            ++out.inserted_circumcenters;
            fresh.push_back({static_cast<VertexId>(m.vertices.size() - 1), c.priority, true});
        }
    }

    // Phase 2: flip to the constrained Delaunay fixpoint around the insertions.
    {
        std::deque<std::pair<TriId, int>> work;
        for (const auto& iv : fresh) {
            for (TriId t : m.incident_triangles(iv.v))
                for (int e = 0; e < 3; ++e) work.emplace_back(t, e);
        }
        lawson_fixpoint(m, std::move(work));
    }

    // Phase 3: redundant-point removal to fixpoint. Each pass sweeps the
    // whole mesh performing every removal it finds (a removal can expose new
    // redundancies, hence the outer fixpoint); removals are bounded by the
    // batch size, so this terminates.
    std::vector<std::uint32_t> fresh_of(m.vertices.size(), kNone);
    for (std::uint32_t k = 0; k < fresh.size(); ++k) fresh_of[fresh[k].v] = k;
    auto vertex_entry = [&](VertexId v) -> detail::InsertedVertex* {
        if (v < first_new || fresh_of[v] == kNone) return nullptr;
        detail::InsertedVertex& iv = fresh[fresh_of[v]];
        return iv.removed ? nullptr : &iv;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        // (a) A same-batch circumcenter sitting in the diametric circle of a
        // subsegment is redundant: the subsegment's midpoint supersedes it.
        for (SubsegId s = 0; s < m.subsegments.size(); ++s) {
            if (!m.subsegments[s].alive) continue;
            for (VertexId apex : detail::subsegment_apexes(m, s)) {
                if (apex == kNone) continue;
                detail::InsertedVertex* iv = vertex_entry(apex);
                if (!iv || !iv->is_circumcenter) continue;
                if (!detail::point_encroaches(m, s, m.pos(apex), q.mode)) continue;
                // An abandoned chain will never split again; keep the point.
                subseg_depth.resize(m.subsegments.size(), 0);
                if (subseg_depth[s] >= cfg.split_depth_cap) continue;
                if (!detail::subsegment_split_ok(
                        m, s, midpoint(m.pos(m.subsegments[s].v[0]),
                                       m.pos(m.subsegments[s].v[1]))))
                    continue;
                if (detail::rollback_vertex(m, apex)) {
                    iv->removed = true;
                    ++out.removed_redundant;
                    mark_encroached(s);
                    changed = true;
                    break;   // the other apex changed with the rollback
                }
            }
        }
        // (b) Delaunay-dependent pairs: an edge joining two same-batch
        // circumcenters keeps only the higher-priority endpoint.
        for (TriId t = 0; t < m.triangles.size(); ++t) {
            if (!m.triangles[t].alive) continue;
            for (int e = 0; e < 3 && m.triangles[t].alive; ++e) {
                const auto [x, y] = m.edge_vertices(t, e);
                detail::InsertedVertex* ix = vertex_entry(x);
                detail::InsertedVertex* iy = vertex_entry(y);
                if (!ix || !iy || !ix->is_circumcenter || !iy->is_circumcenter) continue;
                detail::InsertedVertex* lose =
                    priority_less(ix->priority, iy->priority) ? ix : iy;
                if (detail::rollback_vertex(m, lose->v)) {
                    lose->removed = true;
                    ++out.removed_dependent;
                    changed = true;
                }
            }
        }
    }
    return out;
}

namespace detail {

inline void fill_quality_summary(const Mesh& m, const QualityCriteria& q, RunReport& report) {
    double bad_area = 0.0, total_area = 0.0;
    double min_ang = 180.0, max_edge = 0.0;
    std::size_t bad_count = 0;
    for (TriId t = 0; t < m.triangles.size(); ++t) {
        if (!m.triangles[t].alive) continue;
        const double area = triangle_area(m, t);
        total_area += area;
        if (is_bad_triangle(m, t, q)) {
            ++bad_count;
            bad_area += area;
        }
        const Triangle& tt = m.triangles[t];
        for (int i = 0; i < 3; ++i) {
            const Point2& p = m.pos(tt.v[i]);
            const Point2 u = m.pos(tt.v[Mesh::next(i)]) - p;
            const Point2 v = m.pos(tt.v[Mesh::prev(i)]) - p;
            min_ang = std::min(min_ang, std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 /
                                            3.14159265358979323846);
            max_edge = std::max(max_edge, std::sqrt(dot(u, u)));
        }
    }
    report.output_points = m.alive_vertex_count();
    std::size_t steiner = 0;
    for (const Vertex& v : m.vertices)
        if (v.alive && v.kind != VertexKind::Input) ++steiner;
    report.steiner_points = steiner;
    report.bad_triangles = bad_count;
    report.bad_area_percent = total_area > 0.0 ? bad_area / total_area * 100.0 : 0.0;
    report.min_angle_deg = min_ang;
    report.max_edge = max_edge;
}

} // namespace detail

// Batch refinement to quality. Returns the refined mesh's run report; the
// mesh is modified in place.
inline RunReport refine(Mesh& m, const QualityCriteria& q, const EngineConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const auto wall0 = clock::now();
    RunReport report;
    std::vector<std::uint32_t> subseg_depth(m.subsegments.size(), 0);
    const unsigned executors = cfg.executors();

    for (std::size_t iter = 0;; ++iter) {
        if (iter >= cfg.iteration_cap) {
            report.iteration_cap_hit = true;
            break;
        }
        std::map<std::string, double> phases;
        auto timed = [&](const char* name, auto&& fn) {
            const auto t0 = clock::now();
            fn();
            phases[name] = std::chrono::duration<double>(clock::now() - t0).count();
        };

        std::vector<SplitCandidate> cands;
        timed("collect", [&] { cands = collect(m, q, cfg); });
        if (cands.empty()) break;
        const std::size_t attempted = cands.size();

        BatchOutcome outcome;
        timed("split_points", [&] {
            outcome.degenerate_fallbacks = compute_splitting_points(m, cands);
        });
        timed("locate", [&] {
            detail::parallel_for(cands.size(), executors, [&](std::size_t i) {
                locate(m, cands[i]);
            });
        });
        // The per-triangle claim is not optional: insertion requires each
        // surviving candidate's triangle to be uniquely claimed. Rule 2 only
        // gates the cavity approximation on top of it.
        timed("claim", [&] { claim_filter(m, cands, executors); });
        if (cfg.rules.rule2_filtering_enabled) {
            timed("cavity", [&] {
                cavity_filter(m, cands, cfg.cavity_n, cfg.compaction(), executors);
            });
        }
        timed("insert", [&] {
            const BatchOutcome o = insert_batch(m, cands, q, cfg, subseg_depth);
            outcome.inserted_midpoints = o.inserted_midpoints;
            outcome.inserted_circumcenters = o.inserted_circumcenters;
            outcome.removed_redundant = o.removed_redundant;
            outcome.removed_dependent = o.removed_dependent;
            outcome.dropped = o.dropped;
            outcome.marked_encroached = o.marked_encroached;
        });

        report.batches.push_back(
            record_batch(report.batches.size(), std::move(phases), attempted,
                         outcome.retained()));
        if (outcome.retained() == 0 && outcome.marked_encroached == 0)
            break;   // nothing survived and nothing was queued: steady state
    }

    report.wall_seconds = std::chrono::duration<double>(clock::now() - wall0).count();
    detail::fill_quality_summary(m, q, report);
    return report;
}

// Quality summary of an arbitrary mesh against the criteria (no refinement).
inline RunReport quality_report(const Mesh& m, const QualityCriteria& q) {
    RunReport report;
    detail::fill_quality_summary(m, q, report);
    return report;
}

// Classic sequential Ruppert loop, one point at a time: the Steiner-count
// baseline the batch engine is measured against.
inline RunReport refine_ruppert_sequential(Mesh& m, const QualityCriteria& q,
                                           const EngineConfig& cfg) {
    std::vector<std::uint32_t> subseg_depth(m.subsegments.size(), 0);
    const std::size_t cap = cfg.iteration_cap * 100 + 1000000;

    auto split_subseg = [&](SubsegId s) {
        subseg_depth.resize(m.subsegments.size(), 0);
        const std::uint32_t depth = subseg_depth[s] + 1;
        const Point2 mid = midpoint(m.pos(m.subsegments[s].v[0]), m.pos(m.subsegments[s].v[1]));
        const VertexId w = m.split_subsegment(s, mid, ++m.batch_epoch);
        subseg_depth.resize(m.subsegments.size(), 0);
        subseg_depth[m.subsegments.size() - 2] = depth;
        subseg_depth[m.subsegments.size() - 1] = depth;
        std::deque<std::pair<TriId, int>> work;
        for (TriId t : m.incident_triangles(w))
            for (int e = 0; e < 3; ++e) work.emplace_back(t, e);
        lawson_fixpoint(m, std::move(work));
    };

    for (std::size_t iter = 0; iter < cap; ++iter) {
        // Encroached subsegments first.
        subseg_depth.resize(m.subsegments.size(), 0);
        SubsegId enc = kNone;
        for (SubsegId s = 0; s < m.subsegments.size(); ++s) {
            if (!m.subsegments[s].alive || !is_encroached(m, s, q.mode)) continue;
            if (subseg_depth[s] >= cfg.split_depth_cap) continue;
            if (!detail::subsegment_split_ok(
                    m, s, midpoint(m.pos(m.subsegments[s].v[0]), m.pos(m.subsegments[s].v[1]))))
                continue;
            enc = s;
            break;
        }
        if (enc != kNone) {
            split_subseg(enc);
            continue;
        }
        TriId bad = kNone;
        for (TriId t = 0; t < m.triangles.size(); ++t) {
            if (m.triangles[t].alive && is_bad_triangle(m, t, q) &&
                detail::triangle_resolvable(m, t)) {
                bad = t;
                break;
            }
        }
        if (bad == kNone) break;

        std::vector<SplitCandidate> single(1);
        single[0].kind = SplitCandidate::Kind::Tri;
        single[0].id = bad;
        single[0].priority = {PriorityKey::Band::Circumcenter, detail::triangle_area(m, bad), 0};
        compute_splitting_points(m, single);
        locate(m, single[0]);
        SplitCandidate& c = single[0];
        if (!c.alive) break;   // permanent geometric drop; cannot make progress
        if (c.kind == SplitCandidate::Kind::Subseg) {
            subseg_depth.resize(m.subsegments.size(), 0);
            if (subseg_depth[c.id] >= cfg.split_depth_cap ||
                !detail::subsegment_split_ok(m, c.id, c.point))
                break;
            split_subseg(c.id);
            continue;
        }
        // Classic rule: a circumcenter encroaching some subsegment is not
        // inserted; the subsegment splits instead.
        SubsegId enc_by_cc = kNone;
        for (SubsegId s = 0; s < m.subsegments.size(); ++s) {
            if (m.subsegments[s].alive && detail::point_encroaches(m, s, c.point, q.mode)) {
                enc_by_cc = s;
                break;
            }
        }
        if (enc_by_cc != kNone) {
            subseg_depth.resize(m.subsegments.size(), 0);
            if (subseg_depth[enc_by_cc] >= cfg.split_depth_cap ||
                !detail::subsegment_split_ok(
                    m, enc_by_cc, midpoint(m.pos(m.subsegments[enc_by_cc].v[0]),
                                           m.pos(m.subsegments[enc_by_cc].v[1]))))
                break;
            split_subseg(enc_by_cc);
            continue;
        }
        const Location loc = locate_point(m, c.located, c.point, true);
        VertexId w = kNone;
        if (loc.kind == Location::Kind::Inside) {
            w = m.split_triangle(loc.tri, c.point, VertexKind::SteinerCircumcenter,
                                 ++m.batch_epoch);
        } else if (loc.kind == Location::Kind::OnEdge &&
                   m.triangles[loc.tri].seg[loc.edge] == kNone) {
            w = m.split_edge(loc.tri, loc.edge, c.point, VertexKind::SteinerCircumcenter,
                             ++m.batch_epoch);
        } else {
            break;
        }
        std::deque<std::pair<TriId, int>> work;
        for (TriId t : m.incident_triangles(w))
            for (int e = 0; e < 3; ++e) work.emplace_back(t, e);
        lawson_fixpoint(m, std::move(work));
    }

    return quality_report(m, q);
}

} // namespace cdtref

#endif
