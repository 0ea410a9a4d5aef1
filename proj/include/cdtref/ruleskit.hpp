#ifndef CDTREF_RULESKIT_HPP
#define CDTREF_RULESKIT_HPP

// Throughput-model instrumentation: the five waste-management rules as pure
// decision functions, per-batch metrics records, and the completion-rate
// monitor used by the parallel executor's early-stop hook.

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdtref {

struct ZeroLatency : std::domain_error {
    ZeroLatency() : std::domain_error("latency must be positive") {}
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct RuleFlags {
    std::size_t rule1_compaction_threshold = 1024;
    bool rule2_filtering_enabled = true;
    double rule3_gamma = 0.2;
    bool rule4_unified_collection = true;
    bool rule5_split_lengthy_work = true;   // carried by expandlist; idle in 2D
};

struct BatchMetrics {
    std::size_t batch_index = 0;
    std::size_t attempted = 0;              // work items entering the batch
    std::size_t concurrency = 0;            // useful items completed (C)
    double latency = 0.0;                   // batch wall-time in seconds (L)
    double throughput = 0.0;                // C / L
    double waste_fraction = 0.0;            // 1 - useful/attempted
    std::map<std::string, double> phase_breakdown;   // phase -> seconds
};

struct RunReport {
    std::vector<BatchMetrics> batches;
    std::size_t output_points = 0;
    std::size_t steiner_points = 0;
    std::size_t bad_triangles = 0;
    double bad_area_percent = 0.0;
    double min_angle_deg = 0.0;
    double max_edge = 0.0;
    double wall_seconds = 0.0;
    bool iteration_cap_hit = false;
};

// Throughput is the ratio of concurrency to latency.
inline double little_throughput(std::size_t c, double l) {
    if (l <= 0.0) throw ZeroLatency{};
    return static_cast<double>(c) / l;
}

// Filtering that grows useful-work fraction from alpha to beta pays off iff
// the latency it adds keeps (L + ell)/L below beta/alpha.
inline bool rule2_filter_beneficial(double alpha, double beta, double l, double ell) {
    if (!(0.0 < alpha && alpha < beta && beta <= 1.0) || !(l > 0.0) || !(ell >= 0.0))
        throw DomainError("rule2: need 0 < alpha < beta <= 1, l > 0, ell >= 0");
    return (l + ell) / l < beta / alpha;
}

// Abandoning the slowest gamma fraction pays off iff it saves more than
// gamma of the batch latency.
inline bool rule3_early_stop_beneficial(double gamma, double l, double ell) {
    if (!(0.0 < gamma && gamma < 1.0) || !(l > 0.0) || !(0.0 <= ell && ell < l))
        throw DomainError("rule3: need gamma in (0,1), l > 0, 0 <= ell < l");
    return ell > gamma * l;
}

// Merging two batches beats running them back to back iff the merged
// throughput exceeds the serial aggregate.
inline bool rule4_merge_beneficial(std::size_t c_i, std::size_t c_j, double l_i, double l_j,
                                   std::size_t c_m, double l_m) {
    if (!(l_i > 0.0 && l_j > 0.0 && l_m > 0.0) || c_i == 0 || c_j == 0 || c_m == 0)
        throw DomainError("rule4: all counts and latencies must be positive");
    return static_cast<double>(c_m) / l_m >
           static_cast<double>(c_i + c_j) / (l_i + l_j);
}

// Streaming completion monitor: signal stop once at least (1 - gamma) of the
// work has completed AND the trailing completion rate has collapsed below
// rate_floor_factor of its observed peak.
class Rule3CompletionMonitor {
public:
    Rule3CompletionMonitor(std::size_t total, double gamma, double rate_floor_factor = 0.25,
                           std::size_t window = 16)
        : total_(total), gamma_(gamma), floor_(rate_floor_factor), window_(window) {
        if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("monitor: gamma in (0,1)");
    }

    // Feed one completion timestamp (seconds, nondecreasing). Returns the
    // current stop decision.
    bool record(double t) {
        times_.push_back(t);
        const std::size_t n = times_.size();
        if (n >= 2) {
            const std::size_t lo = n > window_ ? n - window_ : 0;
            const double dt = times_.back() - times_[lo];
            const double rate = dt > 0.0 ? static_cast<double>(n - lo) / dt : 1e300;
            peak_rate_ = std::max(peak_rate_, rate);
            last_rate_ = rate;
        }
        return should_stop();
    }

    bool should_stop() const {
        if (total_ == 0) return true;
        const double done = static_cast<double>(times_.size()) / static_cast<double>(total_);
        return done >= 1.0 - gamma_ && last_rate_ < floor_ * peak_rate_;
    }

private:
    std::size_t total_;
    double gamma_;
    double floor_;
    std::size_t window_;
    std::vector<double> times_;
    double peak_rate_ = 0.0;
    double last_rate_ = 1e300;
};

inline BatchMetrics record_batch(std::size_t batch_index,
                                 std::map<std::string, double> phase_seconds,
                                 std::size_t attempted, std::size_t useful) {
    BatchMetrics m;
    m.batch_index = batch_index;
    m.attempted = attempted;
    m.concurrency = useful;
    for (const auto& [k, v] : phase_seconds) m.latency += v;
    m.phase_breakdown = std::move(phase_seconds);
    m.throughput = m.latency > 0.0 ? static_cast<double>(useful) / m.latency : 0.0;
    m.waste_fraction = attempted > 0 ? static_cast<double>(attempted - useful) /
                                           static_cast<double>(attempted)
                                     : 0.0;
    return m;
}

// One flat key-value record per batch, newline-delimited `key=value` pairs
// separated by spaces; phase latencies in nanoseconds.
inline void emit_metrics(std::ostream& os, const RunReport& report, const RuleFlags& flags) {
    for (const BatchMetrics& b : report.batches) {
        os << "batch=" << b.batch_index << " attempted=" << b.attempted
           << " useful=" << b.concurrency << " latency_ns=" << static_cast<std::uint64_t>(b.latency * 1e9)
           << " throughput=" << b.throughput << " waste_fraction=" << b.waste_fraction;
        for (const auto& [k, v] : b.phase_breakdown)
            os << " phase_" << k << "_ns=" << static_cast<std::uint64_t>(v * 1e9);
        os << " rule1_threshold=" << flags.rule1_compaction_threshold
           << " rule2=" << flags.rule2_filtering_enabled << " rule3_gamma=" << flags.rule3_gamma
           << " rule4=" << flags.rule4_unified_collection
           << " rule5=" << flags.rule5_split_lengthy_work << "\n";
    }
}

} // namespace cdtref

#endif
