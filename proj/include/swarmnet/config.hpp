#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnet/control.hpp"
#include "swarmnet/mac.hpp"
#include "swarmnet/propagation.hpp"
#include "swarmnet/world.hpp"

namespace swarmnet {

enum class SimMode { full_network, propagation_only };
enum class ControllerKind { leader_follower, emergent, formation, hold_position };
enum class ControlTiming { per_packet, per_slotframe, every_k_slots };

struct MacConfig {
    Slotframe frame;
    std::int64_t join_timeout_slots = 10000;
};

struct ControlConfig {
    ControllerKind controller = ControllerKind::leader_follower;
    FlockParams flock;
    FormationParams formation;
    ControlTiming timing = ControlTiming::per_slotframe;
    int timing_k = 1;
    int stale_timeout_slotframes = 3;
};

struct MetricsConfig {
    double convergence_epsilon = 1e-3;  // m/s
    int convergence_hold_steps = 5;
    double residual_floor = 1e-12;
};

struct RunConfig {
    SimMode mode = SimMode::full_network;
    double control_period = 0.1;  // s, propagation-only step
    std::int64_t horizon_steps = 1000;
    int trials = 1;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    std::int64_t trace_stride = 1;  // 0 disables the position trace
    bool log_deliveries = false;
    bool stop_at_formation = false;
    bool stop_at_convergence = false;
};

struct ExperimentConfig {
    WorldConfig world;
    LinkModel link;
    MacConfig mac;
    ControlConfig control;
    MetricsConfig metrics;
    RunConfig run;
};

// Flat dotted-key config document, e.g. {"world.n_agents": 10, ...}.
// Unknown keys and ill-typed values raise ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& flat);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Applies a single "key=value-literal" override (value parsed by key type).
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Every known key with its current value, in registry order.
nlohmann::ordered_json config_to_flat_json(const ExperimentConfig& cfg);

// Throws ConfigError on invariant violations; appends non-fatal notes
// (e.g. full-network schedulability above 100 agents) to warnings.
void validate_config(const ExperimentConfig& cfg, std::vector<std::string>* warnings = nullptr);

// Simulation timestep: explicit world.dt if set, otherwise one slot
// (full network) or one control period (propagation only).
double resolved_dt(const ExperimentConfig& cfg);

std::string to_string(SimMode m);
std::string to_string(ControllerKind c);
std::string to_string(ControlTiming t);
std::string to_string(LinkVariant v);

}  // namespace swarmnet
