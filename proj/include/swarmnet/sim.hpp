#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "swarmnet/config.hpp"
#include "swarmnet/control.hpp"
#include "swarmnet/mac.hpp"
#include "swarmnet/metrics.hpp"

namespace swarmnet {

struct TrialTrace {
    std::vector<StepMetrics> steps;
    std::int64_t formation_asn = -1;  // full-network mode only
    bool has_network_phase = false;
    std::int64_t steps_run = 0;
    std::vector<Vec2> final_positions;
    std::vector<Vec2> final_velocities;
    // Post-formation scheduled transmitters, retained for small trials.
    std::vector<int> tx_sequence_post_formation;
    DeliveryStats delivery_stats{false};
    DeliveryStats delivery_stats_post_formation{false};
    bool singularity_hit = false;
};

struct TrialSummary {
    int trial_index = 0;
    double flock_speed = 0.0;  // time-averaged projected mean, 0 if network never formed
    SummaryStats flock_speed_steps;
    std::optional<double> residual_log_sse;
    bool residual_swapped_axes = false;
    std::optional<std::int64_t> convergence_steps;
    bool has_network_phase = false;
    std::optional<std::int64_t> network_formation_steps;
    double mean_link_pdr = 0.0;
    std::int64_t delivery_attempts = 0;
    std::int64_t delivery_successes = 0;
    std::int64_t collision_drops = 0;
    std::int64_t collision_drops_post_formation = 0;
    bool singularity_hit = false;
};

struct TrialResult {
    TrialSummary summary;
    TrialTrace trace;
};

// Optional per-event sinks; both see every event regardless of stride so the
// caller owns any down-sampling policy for deliveries.
struct TrialObservers {
    std::function<void(std::int64_t step, const std::vector<AgentState>&)> on_trace_row;
    std::int64_t trace_stride = 1;
    std::function<void(const Delivery&)> on_delivery;
};

// One seeded trial, stepwise. All randomness comes from named substreams of
// (master_seed, trial_index), so a trial is a pure function of (config, index).
class Simulation {
public:
    Simulation(const ExperimentConfig& cfg, int trial_index);

    void step();
    void run(const TrialObservers* observers = nullptr);

    std::int64_t now() const { return now_; }
    bool network_formed() const { return join_.formation_asn >= 0; }
    std::int64_t formation_asn() const { return join_.formation_asn; }
    const std::vector<AgentState>& agents() const { return agents_; }
    const BeliefState& belief(int agent) const { return beliefs_[static_cast<std::size_t>(agent)]; }
    const TrialTrace& trace() const { return trace_; }

    TrialResult finish();  // assembles summary + trace (call after run/steps)

private:
    void step_full_network();
    void step_propagation_only();
    bool control_due(std::int64_t asn) const;
    void apply_controls(std::int64_t newest_allowed_asn);
    void record_step_metrics();

    ExperimentConfig cfg_;
    int trial_index_ = 0;
    double dt_ = 0.0;
    int slotframe_length_ = 1;
    std::int64_t stale_window_ = 1;  // slots (full) or steps (propagation-only)

    RngStream link_rng_;
    RngStream delivery_rng_;
    RngStream join_rng_;

    std::vector<AgentState> agents_;
    std::vector<BeliefState> beliefs_;
    std::vector<Vec2> commands_;
    std::vector<char> received_since_control_;
    LinkField links_;
    JoinState join_;
    std::vector<int> announce_slots_;  // per agent, -1 when joined
    bool join_timed_out_ = false;

    std::int64_t now_ = 0;
    int consecutive_quiet_steps_ = 0;
    TrialTrace trace_;
    std::vector<Delivery> slot_deliveries_;  // reused per slot
    struct PairScratch {
        float rssi_dbm = 0.0f;
        float pdr = 0.0f;
    };
    std::vector<PairScratch> pair_scratch_;  // propagation-only per-step triangle
    const TrialObservers* observers_ = nullptr;
};

TrialResult run_trial(const ExperimentConfig& cfg, int trial_index,
                      const TrialObservers* observers = nullptr);

}  // namespace swarmnet
