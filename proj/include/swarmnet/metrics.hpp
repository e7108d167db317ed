#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "swarmnet/vec2.hpp"

namespace swarmnet {

// One attempted reception: a transmission audible (pdr > 0) at dst.
struct Delivery {
    std::int64_t asn = 0;
    int src = 0;
    int dst = 0;
    double rssi_dbm = 0.0;
    int channel = 0;
    bool success = false;
    bool collision = false;  // destroyed by a concurrent audible transmitter
};

// Scalars retained per step; full position dumps stream to the trace file.
struct StepMetrics {
    std::int64_t asn = 0;
    double mean_velocity_along_leader = 0.0;
    double max_agent_speed = 0.0;
};

struct SummaryStats {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0;
};

SummaryStats summarize(std::vector<double> values);
double median_of(std::vector<double> values);

// Mean over agents of velocity projected on the leader direction.
double step_flock_speed(std::span<const Vec2> velocities, Vec2 leader_direction);

// Time-average of the per-step projected mean over steps with asn strictly
// greater than after_asn. Empty selection reports 0 (failed-network marker).
double flock_speed(std::span<const StepMetrics> steps, std::int64_t after_asn);

// First step index (into the max-speed series) from which every agent's speed
// stays below epsilon for hold_steps consecutive steps. nullopt = never.
std::optional<std::int64_t> convergence_time(std::span<const double> max_speed_per_step,
                                             double epsilon, int hold_steps);

struct OlsFit {
    double a0 = 0.0;  // intercept
    double a1 = 0.0;  // slope
};
OlsFit ols_fit_y_on_x(std::span<const Vec2> points);

struct ResidualError {
    double log_sse = 0.0;
    bool swapped_axes = false;  // vertical-degenerate input, fitted x on y
};

// ln of the sum of squared y-residuals of the least-squares line, clamped
// below at `floor` so exact fits stay finite.
ResidualError residual_error(std::span<const Vec2> points, double floor = 1e-12);

struct PairKey {
    int src = 0;
    int dst = 0;
    bool operator<(const PairKey& o) const {
        return src != o.src ? src < o.src : dst < o.dst;
    }
};

struct PairStats {
    std::int64_t attempts = 0;
    std::int64_t successes = 0;
    double empirical_pdr() const {
        return attempts > 0 ? static_cast<double>(successes) / static_cast<double>(attempts) : 0.0;
    }
};

// Accumulates delivery statistics online so big trials never retain the log.
class DeliveryStats {
public:
    explicit DeliveryStats(bool keep_per_pair = true) : keep_per_pair_(keep_per_pair) {}

    void record(const Delivery& d);
    void record_after(const Delivery& d, std::int64_t min_asn_exclusive);

    std::int64_t attempts() const { return attempts_; }
    std::int64_t successes() const { return successes_; }
    std::int64_t collisions() const { return collisions_; }
    double mean_link_pdr() const {
        return attempts_ > 0 ? static_cast<double>(successes_) / static_cast<double>(attempts_)
                             : 0.0;
    }
    const std::map<PairKey, PairStats>& per_pair() const { return per_pair_; }

private:
    bool keep_per_pair_ = true;
    std::int64_t attempts_ = 0;
    std::int64_t successes_ = 0;
    std::int64_t collisions_ = 0;
    std::map<PairKey, PairStats> per_pair_;
};

struct NetworkStats {
    std::map<PairKey, PairStats> per_pair;
    std::int64_t collisions = 0;
    std::int64_t formation_asn = -1;
};

NetworkStats network_stats(std::span<const Delivery> log, std::int64_t formation_asn = -1);

}  // namespace swarmnet
