#include "swarmnet/sim.hpp"

#include <algorithm>
#include <cmath>

#include "swarmnet/errors.hpp"

namespace swarmnet {

namespace {
constexpr int kLeaderId = 0;
// Per-pair stats stay on for small trials; big sweeps only need aggregates.
constexpr int kMaxPerPairAgents = 64;
}  // namespace

Simulation::Simulation(const ExperimentConfig& cfg, int trial_index)
    : cfg_(cfg),
      trial_index_(trial_index),
      link_rng_(make_stream(cfg.run.master_seed, static_cast<std::uint64_t>(trial_index),
                            Substream::link_sampling)),
      delivery_rng_(make_stream(cfg.run.master_seed, static_cast<std::uint64_t>(trial_index),
                                Substream::delivery_draws)),
      join_rng_(make_stream(cfg.run.master_seed, static_cast<std::uint64_t>(trial_index),
                            Substream::mac_join)),
      links_(cfg.link, cfg.world.n_agents),
      join_(make_join_state(cfg.world.n_agents, kLeaderId)) {
    validate_config(cfg_);

    const int n = cfg_.world.n_agents;
    dt_ = resolved_dt(cfg_);
    slotframe_length_ = resolved_slotframe_length(cfg_.mac.frame, n);
    if (cfg_.run.mode == SimMode::full_network) {
        stale_window_ = static_cast<std::int64_t>(cfg_.control.stale_timeout_slotframes) *
                        slotframe_length_;
    } else {
        // One propagation-only step is one broadcast round.
        stale_window_ = cfg_.control.stale_timeout_slotframes;
    }

    RngStream spawn_rng = make_stream(cfg_.run.master_seed,
                                      static_cast<std::uint64_t>(trial_index), Substream::spawn);
    agents_ = cfg_.world.spawn == SpawnKind::line
                  ? spawn_line(n, cfg_.world.spawn_spacing)
                  : spawn_disk(n, cfg_.world.spawn_density, spawn_rng);

    beliefs_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) beliefs_.push_back(make_belief(i, n));
    commands_.assign(static_cast<std::size_t>(n), Vec2{});
    received_since_control_.assign(static_cast<std::size_t>(n), 0);
    announce_slots_.assign(static_cast<std::size_t>(n), -1);

    const bool per_pair = n <= kMaxPerPairAgents;
    trace_.delivery_stats = DeliveryStats(per_pair);
    trace_.delivery_stats_post_formation = DeliveryStats(per_pair);
    trace_.has_network_phase = cfg_.run.mode == SimMode::full_network;
    trace_.formation_asn = join_.formation_asn;
}

bool Simulation::control_due(std::int64_t asn) const {
    switch (cfg_.control.timing) {
        case ControlTiming::per_slotframe:
            return asn % slotframe_length_ == 0;
        case ControlTiming::every_k_slots:
            return asn % cfg_.control.timing_k == 0;
        case ControlTiming::per_packet:
            return true;  // gated per agent on received_since_control_
    }
    return true;
}

void Simulation::apply_controls(std::int64_t newest_allowed_asn) {
    const int n = cfg_.world.n_agents;
    const bool per_packet = cfg_.run.mode == SimMode::full_network &&
                            cfg_.control.timing == ControlTiming::per_packet;
    for (int i = 0; i < n; ++i) {
        if (per_packet && !received_since_control_[static_cast<std::size_t>(i)] &&
            agents_[static_cast<std::size_t>(i)].role != Role::leader) {
            continue;  // keep the previous command until the next packet
        }
        BeliefState& belief = beliefs_[static_cast<std::size_t>(i)];
        prune_beliefs(belief, newest_allowed_asn, stale_window_);
        const AgentState& self = agents_[static_cast<std::size_t>(i)];
        Vec2 u{};
        switch (cfg_.control.controller) {
            case ControllerKind::leader_follower:
                u = flock_control(belief, self, cfg_.control.flock, n, newest_allowed_asn,
                                  stale_window_, kLeaderId);
                break;
            case ControllerKind::emergent: {
                ControlDiagnostics diag;
                u = emergent_flock_control(belief, self, cfg_.control.flock, newest_allowed_asn,
                                           stale_window_, &diag);
                trace_.singularity_hit |= diag.singularity_hit;
                break;
            }
            case ControllerKind::formation:
                u = formation_control(belief, self, cfg_.control.formation, newest_allowed_asn,
                                      stale_window_);
                break;
            case ControllerKind::hold_position:
                u = Vec2{};
                break;
        }
        commands_[static_cast<std::size_t>(i)] = u;
        received_since_control_[static_cast<std::size_t>(i)] = 0;
    }
}

void Simulation::record_step_metrics() {
    StepMetrics m;
    m.asn = now_;
    double proj = 0.0;
    double max_speed = 0.0;
    const Vec2 dir = normalized(cfg_.control.flock.leader_direction);
    for (const AgentState& a : agents_) {
        proj += dot(a.velocity, dir);
        max_speed = std::max(max_speed, norm(a.velocity));
    }
    m.mean_velocity_along_leader = proj / static_cast<double>(agents_.size());
    m.max_agent_speed = max_speed;
    trace_.steps.push_back(m);

    // Convergence tracking for early stopping; pre-formation stillness in
    // full-network mode does not count.
    const bool countable = cfg_.run.mode == SimMode::propagation_only || network_formed();
    if (countable && max_speed < cfg_.metrics.convergence_epsilon) {
        ++consecutive_quiet_steps_;
    } else {
        consecutive_quiet_steps_ = 0;
    }
}

void Simulation::step_full_network() {
    const int n = cfg_.world.n_agents;
    const std::int64_t asn = now_;
    const bool formed = network_formed();

    // Unjoined agents are not slot-synchronized yet: each frame they announce
    // once in a slot drawn from their own skewed clock.
    if (!formed && !join_timed_out_ && asn % slotframe_length_ == 0) {
        for (int i = 0; i < n; ++i) {
            announce_slots_[static_cast<std::size_t>(i)] =
                join_.joined[static_cast<std::size_t>(i)]
                    ? -1
                    : static_cast<int>(join_rng_.uniform_below(
                          static_cast<std::uint32_t>(slotframe_length_)));
        }
    }

    // Control first: commands may only depend on packets delivered before asn.
    if (formed && control_due(asn)) {
        apply_controls(asn - 1);
    }
    integrate_step(agents_, commands_, dt_, cfg_.world.v_max);

    // MAC: scheduled RRSF transmitter (if synchronized) plus announcers.
    SlotAssignment assignment = rrsf_assignment(n, asn, cfg_.mac.frame);
    const int owner = assignment.tx[0];
    if (!join_.joined[static_cast<std::size_t>(owner)]) assignment.tx.clear();
    std::vector<int> announcers;
    if (!formed && !join_timed_out_) {
        const int slot_in_frame = static_cast<int>(asn % slotframe_length_);
        for (int i = 0; i < n; ++i) {
            if (announce_slots_[static_cast<std::size_t>(i)] == slot_in_frame) {
                announcers.push_back(i);
            }
        }
    }

    slot_deliveries_.clear();
    deliver_slot(assignment, announcers, agents_, links_, link_rng_, delivery_rng_,
                 slot_deliveries_);

    for (const Delivery& d : slot_deliveries_) {
        trace_.delivery_stats.record(d);
        if (formed) trace_.delivery_stats_post_formation.record(d);
        if (observers_ != nullptr && observers_->on_delivery) observers_->on_delivery(d);
        if (d.success) {
            const AgentState& src = agents_[static_cast<std::size_t>(d.src)];
            update_belief(beliefs_[static_cast<std::size_t>(d.dst)],
                          Packet{d.src, src.position, src.velocity, asn}, asn, kLeaderId);
            received_since_control_[static_cast<std::size_t>(d.dst)] = 1;
        }
    }

    if (!formed) {
        if (!join_timed_out_) {
            join_step(join_, slot_deliveries_, asn);
            if (network_formed()) {
                trace_.formation_asn = join_.formation_asn;
            } else if (asn + 1 >= cfg_.mac.join_timeout_slots) {
                join_timed_out_ = true;  // formation failure: freeze the join process
            }
        }
    } else if (n <= kMaxPerPairAgents && !assignment.tx.empty()) {
        trace_.tx_sequence_post_formation.push_back(assignment.tx[0]);
    }

    record_step_metrics();
}

void Simulation::step_propagation_only() {
    const int n = cfg_.world.n_agents;
    const std::int64_t step_idx = now_;

    // Broadcast round: every pair is offered both directions, no schedule.
    // Links are sampled once per unordered pair into a scratch triangle, then
    // deliveries run receiver-major so each belief row is written
    // sequentially; the scatter otherwise dominates the step at high n.
    if (pair_scratch_.empty() && n > 1) {
        pair_scratch_.resize(static_cast<std::size_t>(n) * (n - 1) / 2);
    }
    auto tri = [n](int i, int j) {  // i < j
        const auto ui = static_cast<std::size_t>(i);
        return ui * (2 * static_cast<std::size_t>(n) - ui - 1) / 2 +
               (static_cast<std::size_t>(j) - ui - 1);
    };
    for (int i = 0; i < n; ++i) {
        const Vec2 pos_i = agents_[static_cast<std::size_t>(i)].position;
        for (int j = i + 1; j < n; ++j) {
            const LinkField::Sample s = links_.evaluate(
                i, j, pos_i, agents_[static_cast<std::size_t>(j)].position, link_rng_);
            pair_scratch_[tri(i, j)] = {static_cast<float>(s.rssi_dbm),
                                        static_cast<float>(s.pdr)};
        }
    }

    for (int dst = 0; dst < n; ++dst) {
        BeliefState& belief = beliefs_[static_cast<std::size_t>(dst)];
        for (int src = 0; src < n; ++src) {
            if (src == dst) continue;
            const PairScratch s = pair_scratch_[src < dst ? tri(src, dst) : tri(dst, src)];
            if (s.pdr <= 0.0f) continue;
            Delivery d{step_idx, src, dst, s.rssi_dbm, 0,
                       delivery_rng_.bernoulli(s.pdr), false};
            trace_.delivery_stats.record(d);
            if (observers_ != nullptr && observers_->on_delivery) observers_->on_delivery(d);
            if (d.success) {
                const AgentState& sender = agents_[static_cast<std::size_t>(src)];
                update_belief(belief, Packet{src, sender.position, sender.velocity, step_idx},
                              step_idx, kLeaderId);
            }
        }
    }

    // All agents broadcast and react within the same control period.
    apply_controls(step_idx);
    integrate_step(agents_, commands_, dt_, cfg_.world.v_max);
    record_step_metrics();
}

void Simulation::step() {
    if (cfg_.run.mode == SimMode::full_network) {
        step_full_network();
    } else {
        step_propagation_only();
    }
    if (observers_ != nullptr && observers_->on_trace_row && observers_->trace_stride > 0 &&
        now_ % observers_->trace_stride == 0) {
        observers_->on_trace_row(now_, agents_);
    }
    ++now_;
    trace_.steps_run = now_;
}

void Simulation::run(const TrialObservers* observers) {
    observers_ = observers;
    for (std::int64_t t = 0; t < cfg_.run.horizon_steps; ++t) {
        step();
        if (cfg_.run.stop_at_formation && network_formed()) break;
        if (cfg_.run.stop_at_convergence &&
            consecutive_quiet_steps_ >= cfg_.metrics.convergence_hold_steps) {
            break;
        }
    }
    observers_ = nullptr;
}

TrialResult Simulation::finish() {
    TrialResult result;
    trace_.final_positions.clear();
    trace_.final_velocities.clear();
    for (const AgentState& a : agents_) {
        trace_.final_positions.push_back(a.position);
        trace_.final_velocities.push_back(a.velocity);
    }

    TrialSummary& s = result.summary;
    s.trial_index = trial_index_;
    s.has_network_phase = trace_.has_network_phase;
    s.singularity_hit = trace_.singularity_hit;

    const bool full_mode = cfg_.run.mode == SimMode::full_network;
    const std::int64_t after_asn = full_mode ? trace_.formation_asn : -1;
    const bool network_ok = !full_mode || trace_.formation_asn >= 0;

    if (full_mode) {
        s.network_formation_steps = trace_.formation_asn >= 0
                                        ? std::optional<std::int64_t>(trace_.formation_asn)
                                        : std::nullopt;
    }

    if (network_ok) {
        s.flock_speed = flock_speed(trace_.steps, after_asn);
        std::vector<double> step_speeds;
        std::vector<double> max_speeds;
        step_speeds.reserve(trace_.steps.size());
        for (const StepMetrics& m : trace_.steps) {
            if (m.asn <= after_asn) continue;
            step_speeds.push_back(m.mean_velocity_along_leader);
            max_speeds.push_back(m.max_agent_speed);
        }
        s.flock_speed_steps = summarize(std::move(step_speeds));
        s.convergence_steps =
            convergence_time(max_speeds, cfg_.metrics.convergence_epsilon,
                             cfg_.metrics.convergence_hold_steps);
    } else {
        s.flock_speed = 0.0;  // the failed-network marker
        s.convergence_steps = std::nullopt;
    }

    if (agents_.size() >= 2) {
        const ResidualError r = residual_error(trace_.final_positions, cfg_.metrics.residual_floor);
        s.residual_log_sse = r.log_sse;
        s.residual_swapped_axes = r.swapped_axes;
    }

    s.mean_link_pdr = trace_.delivery_stats.mean_link_pdr();
    s.delivery_attempts = trace_.delivery_stats.attempts();
    s.delivery_successes = trace_.delivery_stats.successes();
    s.collision_drops = trace_.delivery_stats.collisions();
    s.collision_drops_post_formation = trace_.delivery_stats_post_formation.collisions();

    result.trace = std::move(trace_);
    return result;
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial_index,
                      const TrialObservers* observers) {
    Simulation sim(cfg, trial_index);
    sim.run(observers);
    return sim.finish();
}

}  // namespace swarmnet
