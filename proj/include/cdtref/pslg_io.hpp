#ifndef CDTREF_PSLG_IO_HPP
#define CDTREF_PSLG_IO_HPP

// .poly/.node/.ele text interchange plus SVG rendering. Numbers are emitted
// with shortest round-trip decimals so a reload is bit-exact.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cdtref/cdt.hpp"
#include "cdtref/mesh.hpp"
#include "cdtref/refine.hpp"
#include "cdtref/ruleskit.hpp"

namespace cdtref {

struct ParseError : std::runtime_error {
    explicit ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(".poly line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

struct CrossingSegments : std::runtime_error {
    CrossingSegments(std::uint32_t i, std::uint32_t j)
        : std::runtime_error("segments " + std::to_string(i) + " and " + std::to_string(j) +
                             " cross"),
          i(i), j(j) {}
    std::uint32_t i, j;
};

struct DuplicatePoint : std::runtime_error {
    DuplicatePoint(std::uint32_t i, std::uint32_t j)
        : std::runtime_error("points " + std::to_string(i) + " and " + std::to_string(j) +
                             " coincide"),
          i(i), j(j) {}
    std::uint32_t i, j;
};

// Parsed .poly model: enough structure to reproduce the file, attributes and
// holes preserved but ignored by refinement.
struct PolyFile {
    struct VertexLine {
        std::uint32_t index = 0;
        Point2 p{};
        std::vector<double> attrs;
        int marker = 0;
    };
    struct SegmentLine {
        std::uint32_t index = 0, a = 0, b = 0;
        int marker = 0;
    };
    std::size_t dimension = 2;
    std::size_t attribute_count = 0;
    bool vertex_markers = false;
    bool segment_markers = false;
    bool one_based = false;
    std::vector<VertexLine> vertices;
    std::vector<SegmentLine> segments;
    std::vector<Point2> holes;
};

namespace detail {

// Whitespace tokens of one logical line, `#` to end-of-line stripped.
class PolyScanner {
public:
    explicit PolyScanner(std::string_view text) : in_(std::string(text)) {}

    // Next non-empty line's tokens; empty vector at EOF.
    std::vector<std::string> next_line() {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
            std::istringstream ls(raw);
            std::vector<std::string> toks;
            for (std::string t; ls >> t;) toks.push_back(std::move(t));
            if (!toks.empty()) return toks;
        }
        return {};
    }

    std::size_t line() const { return line_; }

private:
    std::istringstream in_;
    std::size_t line_ = 0;
};

inline std::uint64_t scan_uint(const std::string& tok, std::size_t line) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError(line, "expected a non-negative integer, got '" + tok + "'");
    return v;
}

inline double scan_double(const std::string& tok, std::size_t line) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError(line, "expected a number, got '" + tok + "'");
    return v;
}

// Shortest decimal that round-trips to the same double.
inline std::string shortest(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

// Segments of a PSLG may share endpoints but nothing else.
inline bool segments_conflict(const Point2& a, const Point2& b, const Point2& c,
                              const Point2& d) {
    if (proper_cross(a, b, c, d)) return true;
    // Endpoint of one strictly interior to the other (covers collinear overlap).
    auto interior = [](const Point2& u, const Point2& w, const Point2& p) {
        return orient2d(u, w, p) == Orientation::Zero && strictly_between(u, w, p);
    };
    if (interior(a, b, c) || interior(a, b, d) || interior(c, d, a) || interior(c, d, b))
        return true;
    // Identical (or reversed) segment counts as crossing everywhere.
    return (a == c && b == d) || (a == d && b == c);
}

// All-pairs below the threshold; a uniform bucket grid over segment boxes
// above it (exactness is unchanged -- the grid only prunes distant pairs).
inline void check_crossings(const Pslg& g, std::size_t all_pairs_threshold = 2000) {
    const std::size_t n = g.segments.size();
    auto test = [&](std::uint32_t i, std::uint32_t j) {
        const auto [a, b] = g.segments[i];
        const auto [c, d] = g.segments[j];
        if (segments_conflict(g.points[a], g.points[b], g.points[c], g.points[d]))
            throw CrossingSegments(i, j);
    };
    if (n <= all_pairs_threshold) {
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) test(i, j);
        return;
    }
    Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Point2& p : g.points) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    const std::size_t side = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
    const double w = std::max(hi.x - lo.x, 1e-300), h = std::max(hi.y - lo.y, 1e-300);
    auto cell = [&](double fx, double fy) {
        const auto ix = std::min(side - 1, static_cast<std::size_t>(std::clamp(fx, 0.0, 1.0) *
                                                                    static_cast<double>(side)));
        const auto iy = std::min(side - 1, static_cast<std::size_t>(std::clamp(fy, 0.0, 1.0) *
                                                                    static_cast<double>(side)));
        return std::pair{ix, iy};
    };
    std::vector<std::vector<std::uint32_t>> cells(side * side);
    for (std::uint32_t i = 0; i < n; ++i) {
        const Point2& a = g.points[g.segments[i].first];
        const Point2& b = g.points[g.segments[i].second];
        const auto [x0, y0] = cell((std::min(a.x, b.x) - lo.x) / w, (std::min(a.y, b.y) - lo.y) / h);
        const auto [x1, y1] = cell((std::max(a.x, b.x) - lo.x) / w, (std::max(a.y, b.y) - lo.y) / h);
        for (std::size_t iy = y0; iy <= y1; ++iy)
            for (std::size_t ix = x0; ix <= x1; ++ix) cells[iy * side + ix].push_back(i);
    }
    for (const auto& bucket : cells)
        for (std::size_t u = 0; u < bucket.size(); ++u)
            for (std::size_t v = u + 1; v < bucket.size(); ++v)
                test(std::min(bucket[u], bucket[v]), std::max(bucket[u], bucket[v]));
}

inline void check_duplicates(const std::vector<Point2>& pts) {
    std::vector<std::uint32_t> idx(pts.size());
    for (std::uint32_t i = 0; i < pts.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
        if (pts[a].y != pts[b].y) return pts[a].y < pts[b].y;
        return a < b;
    });
    for (std::size_t k = 1; k < idx.size(); ++k)
        if (pts[idx[k - 1]] == pts[idx[k]]) throw DuplicatePoint(idx[k - 1], idx[k]);
}

} // namespace detail

inline PolyFile parse_poly(std::string_view text) {
    detail::PolyScanner sc(text);
    PolyFile pf;

    auto header = sc.next_line();
    if (header.size() < 2) throw ParseError(sc.line(), "vertex header needs <count> <dim>");
    const auto vcount = detail::scan_uint(header[0], sc.line());
    pf.dimension = detail::scan_uint(header[1], sc.line());
    if (pf.dimension != 2) throw ParseError(sc.line(), "only dimension 2 is supported");
    pf.attribute_count = header.size() > 2 ? detail::scan_uint(header[2], sc.line()) : 0;
    pf.vertex_markers = header.size() > 3 && detail::scan_uint(header[3], sc.line()) != 0;

    for (std::uint64_t k = 0; k < vcount; ++k) {
        auto toks = sc.next_line();
        const std::size_t want = 3 + pf.attribute_count + (pf.vertex_markers ? 1 : 0);
        if (toks.size() < want) throw ParseError(sc.line(), "short vertex line");
        PolyFile::VertexLine v;
        v.index = static_cast<std::uint32_t>(detail::scan_uint(toks[0], sc.line()));
        v.p = {detail::scan_double(toks[1], sc.line()), detail::scan_double(toks[2], sc.line())};
        for (std::size_t a = 0; a < pf.attribute_count; ++a)
            v.attrs.push_back(detail::scan_double(toks[3 + a], sc.line()));
        if (pf.vertex_markers)
            v.marker = static_cast<int>(detail::scan_double(toks[want - 1], sc.line()));
        if (k == 0) pf.one_based = v.index == 1;
        pf.vertices.push_back(std::move(v));
    }

    auto sheader = sc.next_line();
    if (sheader.empty()) throw ParseError(sc.line(), "missing segment header");
    const auto scount = detail::scan_uint(sheader[0], sc.line());
    pf.segment_markers = sheader.size() > 1 && detail::scan_uint(sheader[1], sc.line()) != 0;
    for (std::uint64_t k = 0; k < scount; ++k) {
        auto toks = sc.next_line();
        const std::size_t want = 3 + (pf.segment_markers ? 1 : 0);
        if (toks.size() < want) throw ParseError(sc.line(), "short segment line");
        PolyFile::SegmentLine s;
        s.index = static_cast<std::uint32_t>(detail::scan_uint(toks[0], sc.line()));
        s.a = static_cast<std::uint32_t>(detail::scan_uint(toks[1], sc.line()));
        s.b = static_cast<std::uint32_t>(detail::scan_uint(toks[2], sc.line()));
        if (pf.segment_markers)
            s.marker = static_cast<int>(detail::scan_double(toks[3], sc.line()));
        pf.segments.push_back(s);
    }

    auto hheader = sc.next_line();
    const auto hcount = hheader.empty() ? 0 : detail::scan_uint(hheader[0], sc.line());
    for (std::uint64_t k = 0; k < hcount; ++k) {
        auto toks = sc.next_line();
        if (toks.size() < 3) throw ParseError(sc.line(), "short hole line");
        pf.holes.push_back({detail::scan_double(toks[1], sc.line()),
                            detail::scan_double(toks[2], sc.line())});
    }
    return pf;
}

inline Pslg to_pslg(const PolyFile& pf) {
    Pslg g;
    std::map<std::uint32_t, std::uint32_t> remap;   // file index -> dense index
    for (const auto& v : pf.vertices) {
        remap[v.index] = static_cast<std::uint32_t>(g.points.size());
        g.points.push_back(v.p);
    }
    detail::check_duplicates(g.points);
    for (const auto& s : pf.segments) {
        const auto a = remap.find(s.a), b = remap.find(s.b);
        if (a == remap.end() || b == remap.end())
            throw ParseError(0, "segment " + std::to_string(s.index) +
                                    " references an unknown vertex");
        if (a->second == b->second)
            throw ParseError(0, "segment " + std::to_string(s.index) + " is degenerate");
        g.segments.emplace_back(a->second, b->second);
    }
    detail::check_crossings(g);
    return close_hull(std::move(g));   // hull edges must be constrained
}

inline Pslg read_poly(std::string_view text) { return to_pslg(parse_poly(text)); }

inline std::string write_poly(const Pslg& g) {
    std::string out;
    out += std::to_string(g.points.size()) + " 2 0 0\n";
    for (std::uint32_t i = 0; i < g.points.size(); ++i)
        out += std::to_string(i) + " " + detail::shortest(g.points[i].x) + " " +
               detail::shortest(g.points[i].y) + "\n";
    out += std::to_string(g.segments.size()) + " 0\n";
    for (std::uint32_t i = 0; i < g.segments.size(); ++i)
        out += std::to_string(i) + " " + std::to_string(g.segments[i].first) + " " +
               std::to_string(g.segments[i].second) + "\n";
    out += "0\n";
    return out;
}

struct NodeEle {
    std::string node, ele;
};

// .node marker column: 1 for input vertices, 0 for Steiner points. Dead
// vertices are compacted out; .ele indices refer to the compacted numbering.
inline NodeEle write_node_ele(const Mesh& m) {
    NodeEle out;
    std::vector<std::uint32_t> dense(m.vertices.size(), kNone);
    std::uint32_t next = 0;
    for (VertexId v = 0; v < m.vertices.size(); ++v)
        if (m.vertices[v].alive) dense[v] = next++;

    out.node = std::to_string(next) + " 2 0 1\n";
    for (VertexId v = 0; v < m.vertices.size(); ++v) {
        if (!m.vertices[v].alive) continue;
        out.node += std::to_string(dense[v]) + " " + detail::shortest(m.pos(v).x) + " " +
                    detail::shortest(m.pos(v).y) + " " +
                    (m.vertices[v].kind == VertexKind::Input ? "1" : "0") + "\n";
    }
    std::size_t tris = 0;
    for (const Triangle& t : m.triangles) tris += t.alive;
    out.ele = std::to_string(tris) + " 3 0\n";
    std::uint32_t row = 0;
    for (TriId t = 0; t < m.triangles.size(); ++t) {
        if (!m.triangles[t].alive) continue;
        out.ele += std::to_string(row++);
        for (VertexId v : m.triangles[t].v) out.ele += " " + std::to_string(dense[v]);
        out.ele += "\n";
    }
    return out;
}

// Minimal .node reader for round-trip checks; returns (position, marker).
inline std::vector<std::pair<Point2, int>> read_node(std::string_view text) {
    detail::PolyScanner sc(text);
    auto header = sc.next_line();
    if (header.size() < 2) throw ParseError(sc.line(), ".node header needs <count> <dim>");
    const auto count = detail::scan_uint(header[0], sc.line());
    std::vector<std::pair<Point2, int>> out;
    for (std::uint64_t k = 0; k < count; ++k) {
        auto toks = sc.next_line();
        if (toks.size() < 3) throw ParseError(sc.line(), "short .node line");
        Point2 p{detail::scan_double(toks[1], sc.line()),
                 detail::scan_double(toks[2], sc.line())};
        const int marker =
            toks.size() > 3 ? static_cast<int>(detail::scan_double(toks.back(), sc.line())) : 0;
        out.emplace_back(p, marker);
    }
    return out;
}

struct SvgStyle {
    double width = 640.0;
    std::string edge = "#888";
    std::string subsegment = "#000";
    std::string bad_fill = "#e5484d";
};

// Triangles outlined, subsegments emphasized, bad triangles (per the given
// criteria) filled and tagged class="bad" so they are countable.
inline std::string write_svg(const Mesh& m, const QualityCriteria& q,
                             const SvgStyle& style = {}) {
    Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (VertexId v = 0; v < m.vertices.size(); ++v) {
        if (!m.vertices[v].alive) continue;
        lo.x = std::min(lo.x, m.pos(v).x);
        lo.y = std::min(lo.y, m.pos(v).y);
        hi.x = std::max(hi.x, m.pos(v).x);
        hi.y = std::max(hi.y, m.pos(v).y);
    }
    const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-300});
    const double s = style.width / span;
    const double height = (hi.y - lo.y) * s;
    auto px = [&](const Point2& p) {
        return std::pair{(p.x - lo.x) * s, height - (p.y - lo.y) * s};   // y-down
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
       << std::max(height, 1.0) << "\" viewBox=\"0 0 " << style.width << " "
       << std::max(height, 1.0) << "\">\n";
    for (TriId t = 0; t < m.triangles.size(); ++t) {
        if (!m.triangles[t].alive) continue;
        const bool bad = is_bad_triangle(m, t, q);
        os << "<polygon";
        if (bad) os << " class=\"bad\"";
        os << " points=\"";
        for (VertexId v : m.triangles[t].v) {
            const auto [x, y] = px(m.pos(v));
            os << x << "," << y << " ";
        }
        os << "\" fill=\"" << (bad ? style.bad_fill : "none") << "\" stroke=\"" << style.edge
           << "\" stroke-width=\"0.5\"/>\n";
    }
    for (const Subsegment& seg : m.subsegments) {
        if (!seg.alive) continue;
        const auto [x1, y1] = px(m.pos(seg.v[0]));
        const auto [x2, y2] = px(m.pos(seg.v[1]));
        os << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
           << "\" stroke=\"" << style.subsegment << "\" stroke-width=\"1.5\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string write_metrics(const RunReport& report, const RuleFlags& flags) {
    std::ostringstream os;
    emit_metrics(os, report, flags);
    return os.str();
}

} // namespace cdtref

#endif
