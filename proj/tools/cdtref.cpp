// cdtref: refine a .poly PSLG to quality and emit .node/.ele (+ SVG/metrics).
// Exit codes: 0 success, 2 input error, 3 a cap was hit.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cdtref/cdt.hpp"
#include "cdtref/pslg_io.hpp"
#include "cdtref/refine.hpp"
#include "cdtref/verify.hpp"

namespace fs = std::filesystem;
using namespace cdtref;

namespace {

struct Options {
    std::string input;
    std::string output_prefix;
    std::string svg_path;
    std::string metrics_path;
    double theta = 20.0;
    double ell = 0.0;   // 0 = unbounded
    std::string mode = "ruppert";
    std::string execution = "sequential";
    unsigned threads = 1;
    std::size_t cavity_n = 32;
    double gamma = 0.2;
    std::size_t compaction_threshold = 1024;
    bool no_rule1 = false, no_rule2 = false, no_rule3 = false, no_rule4 = false,
         no_rule5 = false;
    std::size_t iteration_cap = 10000;
    bool skip_verify = false;
    std::uint64_t seed = 0;
};

void add_engine_flags(CLI::App& app, Options& o) {
    app.add_option("--theta", o.theta, "minimum angle in degrees")->envname("CDTREF_THETA");
    app.add_option("--ell", o.ell, "maximum edge length (0 = unbounded)")
        ->envname("CDTREF_ELL");
    app.add_option("--mode", o.mode, "ruppert|chew")
        ->check(CLI::IsMember({"ruppert", "chew"}))
        ->envname("CDTREF_MODE");
    app.add_option("--execution", o.execution, "sequential|parallel")
        ->check(CLI::IsMember({"sequential", "parallel"}))
        ->envname("CDTREF_EXECUTION");
    app.add_option("--threads", o.threads, "executors in parallel mode")
        ->envname("CDTREF_THREADS");
    app.add_option("--cavity-n", o.cavity_n, "cavity approximation size")
        ->envname("CDTREF_CAVITY_N");
    app.add_option("--gamma", o.gamma, "early-stop fraction")->envname("CDTREF_GAMMA");
    app.add_option("--compaction-threshold", o.compaction_threshold,
                   "list compaction threshold")
        ->envname("CDTREF_COMPACTION_THRESHOLD");
    app.add_flag("--no-rule1", o.no_rule1, "disable compaction suppression")
        ->envname("CDTREF_NO_RULE1");
    app.add_flag("--no-rule2", o.no_rule2, "disable claim/cavity filtering")
        ->envname("CDTREF_NO_RULE2");
    app.add_flag("--no-rule3", o.no_rule3, "disable early-stop monitoring")
        ->envname("CDTREF_NO_RULE3");
    app.add_flag("--no-rule4", o.no_rule4, "disable unified candidate collection")
        ->envname("CDTREF_NO_RULE4");
    app.add_flag("--no-rule5", o.no_rule5, "disable lengthy-work splitting")
        ->envname("CDTREF_NO_RULE5");
    app.add_option("--iteration-cap", o.iteration_cap, "maximum batch count")
        ->envname("CDTREF_ITERATION_CAP");
    app.add_flag("--skip-verify", o.skip_verify, "skip the post-run oracle scan")
        ->envname("CDTREF_SKIP_VERIFY");
    app.add_option("--seed", o.seed, "seed for randomized tie-breaking experiments")
        ->envname("CDTREF_SEED");
}

QualityCriteria criteria_of(const Options& o) {
    QualityCriteria q;
    q.theta = o.theta;
    q.ell = o.ell > 0.0 ? o.ell : std::numeric_limits<double>::infinity();
    q.mode = o.mode == "chew" ? RefineMode::Chew : RefineMode::Ruppert;
    return q;
}

EngineConfig config_of(const Options& o) {
    EngineConfig cfg;
    cfg.execution = o.execution == "parallel" ? ExecutionMode::Parallel
                                              : ExecutionMode::Sequential;
    cfg.executor_count = o.threads;
    cfg.cavity_n = o.cavity_n;
    cfg.iteration_cap = o.iteration_cap;
    cfg.seed = o.seed;
    cfg.rules.rule1_compaction_threshold = o.no_rule1 ? 0 : o.compaction_threshold;
    cfg.rules.rule2_filtering_enabled = !o.no_rule2;
    cfg.rules.rule3_gamma = o.gamma;
    // --no-rule3 keeps the monitor but never stops early.
    if (o.no_rule3) cfg.rules.rule3_gamma = 1e-12;
    cfg.rules.rule4_unified_collection = !o.no_rule4;
    cfg.rules.rule5_split_lengthy_work = !o.no_rule5;
    return cfg;
}

// Full oracle scan below the size threshold; sampled triangle/vertex pairs
// above it (the quadratic scan stops being affordable).
bool post_run_verify(const Mesh& m, const Pslg& g, std::uint64_t seed, std::string& why) {
    if (!conformity_ok(m, g)) {
        why = "conformity violated";
        return false;
    }
    if (m.alive_vertex_count() <= 100000) {
        if (const auto v = constrained_delaunay_violations(m); v != 0) {
            why = "constrained Delaunay violations: " + std::to_string(v);
            return false;
        }
        return true;
    }
    std::vector<TriId> alive;
    for (TriId t = 0; t < m.triangles.size(); ++t)
        if (m.triangles[t].alive) alive.push_back(t);
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<std::size_t> pick_t(0, alive.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_v(0, m.vertices.size() - 1);
    for (int k = 0; k < 10000; ++k) {
        const TriId t = alive[pick_t(rng)];
        const VertexId v = static_cast<VertexId>(pick_v(rng));
        if (!m.vertices[v].alive) continue;
        const Triangle& tt = m.triangles[t];
        if (v == tt.v[0] || v == tt.v[1] || v == tt.v[2]) continue;
        const Point2&a = m.pos(tt.v[0]), &b = m.pos(tt.v[1]), &c = m.pos(tt.v[2]);
        if (incircle(a, b, c, m.pos(v)) != Orientation::Positive) continue;
        const Point2 centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
        if (!cdtref::detail::sightline_blocked(m, m.pos(v), centroid)) {
            why = "sampled constrained Delaunay violation";
            return false;
        }
    }
    return true;
}

struct RunResult {
    int exit_code = 0;
    RunReport report;
    std::string error;
};

RunResult run_one(const Options& o) {
    RunResult r;
    std::ifstream in(o.input);
    if (!in) {
        r.exit_code = 2;
        r.error = "cannot open " + o.input;
        return r;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    Pslg g;
    Mesh m;
    try {
        g = read_poly(buf.str());
        m = build_cdt(g);
    } catch (const std::exception& e) {
        r.exit_code = 2;
        r.error = e.what();
        return r;
    }

    const QualityCriteria q = criteria_of(o);
    const EngineConfig cfg = config_of(o);
    r.report = refine(m, q, cfg);
    if (r.report.iteration_cap_hit) {
        r.exit_code = 3;
        r.error = "iteration cap hit";
    }

    if (!o.skip_verify && r.exit_code == 0) {
        std::string why;
        if (!post_run_verify(m, g, o.seed, why)) {
            r.exit_code = 3;
            r.error = "post-run verification failed: " + why;
        }
    }

    const std::string prefix =
        o.output_prefix.empty() ? fs::path(o.input).replace_extension("").string()
                                : o.output_prefix;
    const NodeEle ne = write_node_ele(m);
    std::ofstream(prefix + ".node") << ne.node;
    std::ofstream(prefix + ".ele") << ne.ele;
    if (!o.svg_path.empty()) std::ofstream(o.svg_path) << write_svg(m, q);
    if (!o.metrics_path.empty())
        std::ofstream(o.metrics_path) << write_metrics(r.report, cfg.rules);
    return r;
}

void print_summary(const RunResult& r) {
    const RunReport& rep = r.report;
    std::printf("points        %zu (%zu Steiner)\n", rep.output_points, rep.steiner_points);
    std::printf("bad triangles %zu (%.4f%% of area)\n", rep.bad_triangles,
                rep.bad_area_percent);
    std::printf("min angle     %.3f deg\n", rep.min_angle_deg);
    std::printf("wall time     %.3f s over %zu batches\n", rep.wall_seconds,
                rep.batches.size());
    if (!rep.batches.empty()) {
        std::printf("%8s %10s %10s %12s %8s\n", "batch", "attempted", "useful", "latency_us",
                    "waste");
        for (const BatchMetrics& b : rep.batches)
            std::printf("%8zu %10zu %10zu %12.1f %7.1f%%\n", b.batch_index, b.attempted,
                        b.concurrency, b.latency * 1e6, b.waste_fraction * 100.0);
    }
}

int run_bench(const std::string& corpus_dir, const Options& base,
              const std::vector<std::string>& combos) {
    std::vector<fs::path> inputs;
    if (fs::exists(corpus_dir))
        for (const auto& e : fs::directory_iterator(corpus_dir))
            if (e.path().extension() == ".poly") inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());

    std::printf("%-24s %-12s %9s %9s %9s %9s %10s\n", "input", "combo", "wall_s", "steiner",
                "bad_area", "batches", "slowdown");
    std::map<std::string, double> baseline_wall;
    for (const fs::path& in : inputs) {
        for (const std::string& combo : combos) {
            Options o = base;
            o.input = in.string();
            o.output_prefix = (fs::temp_directory_path() / in.stem()).string();
            if (combo == "no-rule1") o.no_rule1 = true;
            if (combo == "no-rule2") o.no_rule2 = true;
            if (combo == "no-rule3") o.no_rule3 = true;
            if (combo == "no-rule4") o.no_rule4 = true;
            if (combo == "no-rule5") o.no_rule5 = true;
            if (combo == "parallel") {
                o.execution = "parallel";
                o.threads = std::max(2u, o.threads);
            }
            const RunResult r = run_one(o);
            if (r.exit_code != 0) {
                std::printf("%-24s %-12s FAILED (%s)\n", in.filename().string().c_str(),
                            combo.c_str(), r.error.c_str());
                continue;
            }
            const double wall = r.report.wall_seconds;
            if (combo == "all-rules") baseline_wall[in.string()] = wall;
            std::string slow = "-";
            if (const auto it = baseline_wall.find(in.string());
                it != baseline_wall.end() && combo != "all-rules" && it->second > 0.0) {
                char b[32];
                std::snprintf(b, sizeof b, "%+.1f%%", (wall / it->second - 1.0) * 100.0);
                slow = b;
            }
            std::printf("%-24s %-12s %9.3f %9zu %8.3f%% %9zu %10s\n",
                        in.filename().string().c_str(), combo.c_str(), wall,
                        r.report.steiner_points, r.report.bad_area_percent,
                        r.report.batches.size(), slow.c_str());
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained Delaunay refinement"};
    app.require_subcommand(0, 1);
    Options o;
    add_engine_flags(app, o);
    app.add_option("input", o.input, "input .poly file");
    app.add_option("-o,--output", o.output_prefix, "output path prefix");
    app.add_option("--svg", o.svg_path, "write an SVG rendering");
    app.add_option("--metrics", o.metrics_path, "write per-batch metrics records");

    std::string corpus_dir;
    std::vector<std::string> combos{"all-rules", "no-rule1", "no-rule2", "no-rule3",
                                    "no-rule4", "no-rule5"};
    CLI::App* bench = app.add_subcommand("bench", "run a corpus under flag combinations");
    bench->add_option("corpus", corpus_dir, "directory of .poly files")->required();
    bench->add_option("--combo", combos, "flag combinations to run");
    bench->fallthrough();   // engine flags may follow the subcommand

    CLI11_PARSE(app, argc, argv);

    if (bench->parsed()) return run_bench(corpus_dir, o, combos);

    if (o.input.empty()) {
        std::cerr << "error: an input .poly file is required\n";
        return 2;
    }
    const RunResult r = run_one(o);
    if (r.exit_code != 0) {
        std::cerr << "error: " << r.error << "\n";
        if (r.exit_code == 2) return 2;
    }
    print_summary(r);
    return r.exit_code;
}
