#include "swarmnet/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "swarmnet/errors.hpp"

namespace swarmnet {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T, typename... Pairs>
T enum_from_string(const std::string& key, const std::string& s, Pairs&&... pairs) {
    T out{};
    bool found = false;
    std::string known;
    auto try_one = [&](const char* name, T value) {
        if (!known.empty()) known += ", ";
        known += name;
        if (s == name) {
            out = value;
            found = true;
        }
    };
    (try_one(pairs.first, pairs.second), ...);
    if (!found)
        throw ConfigError("config key '" + key + "': unknown value '" + s + "' (expected one of: " +
                          known + ")");
    return out;
}

double as_number(const std::string& key, const json& v) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t as_integer(const std::string& key, const json& v) {
    if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t as_u64(const std::string& key, const json& v) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    const auto i = v.get<std::int64_t>();
    if (v.is_number_integer() && i < 0)
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool as_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

struct KeyDef {
    const char* name;
    std::function<void(ExperimentConfig&, const json&)> set;
    std::function<json(const ExperimentConfig&)> get;
};

SpawnKind spawn_from_string(const std::string& key, const std::string& s) {
    return enum_from_string<SpawnKind>(key, s, std::pair{"line", SpawnKind::line},
                                       std::pair{"disk", SpawnKind::disk});
}

LinkVariant variant_from_string(const std::string& key, const std::string& s) {
    return enum_from_string<LinkVariant>(
        key, s, std::pair{"full_connectivity", LinkVariant::full_connectivity},
        std::pair{"line_of_sight", LinkVariant::line_of_sight},
        std::pair{"unit_disk", LinkVariant::unit_disk},
        std::pair{"probabilistic_disk", LinkVariant::probabilistic_disk},
        std::pair{"experimental_randomness", LinkVariant::experimental_randomness});
}

ControllerKind controller_from_string(const std::string& key, const std::string& s) {
    return enum_from_string<ControllerKind>(
        key, s, std::pair{"leader_follower", ControllerKind::leader_follower},
        std::pair{"emergent", ControllerKind::emergent},
        std::pair{"formation", ControllerKind::formation},
        std::pair{"static", ControllerKind::hold_position});
}

PotentialKind potential_from_string(const std::string& key, const std::string& s) {
    return enum_from_string<PotentialKind>(key, s, std::pair{"softened", PotentialKind::softened},
                                           std::pair{"singular", PotentialKind::singular});
}

ControlTiming timing_from_string(const std::string& key, const std::string& s) {
    return enum_from_string<ControlTiming>(
        key, s, std::pair{"per_packet", ControlTiming::per_packet},
        std::pair{"per_slotframe", ControlTiming::per_slotframe},
        std::pair{"every_k_slots", ControlTiming::every_k_slots});
}

SimMode mode_from_string(const std::string& key, const std::string& s) {
    return enum_from_string<SimMode>(key, s, std::pair{"full_network", SimMode::full_network},
                                     std::pair{"propagation_only", SimMode::propagation_only});
}

const std::vector<KeyDef>& registry() {
    static const std::vector<KeyDef> defs = {
        {"world.n_agents",
         [](ExperimentConfig& c, const json& v) {
             c.world.n_agents = static_cast<int>(as_integer("world.n_agents", v));
         },
         [](const ExperimentConfig& c) { return json(c.world.n_agents); }},
        {"world.v_max",
         [](ExperimentConfig& c, const json& v) { c.world.v_max = as_number("world.v_max", v); },
         [](const ExperimentConfig& c) { return json(c.world.v_max); }},
        {"world.dt",
         [](ExperimentConfig& c, const json& v) { c.world.dt = as_number("world.dt", v); },
         [](const ExperimentConfig& c) { return json(c.world.dt); }},
        {"world.spawn",
         [](ExperimentConfig& c, const json& v) {
             c.world.spawn = spawn_from_string("world.spawn", as_string("world.spawn", v));
         },
         [](const ExperimentConfig& c) {
             return json(c.world.spawn == SpawnKind::line ? "line" : "disk");
         }},
        {"world.spawn_spacing",
         [](ExperimentConfig& c, const json& v) {
             c.world.spawn_spacing = as_number("world.spawn_spacing", v);
         },
         [](const ExperimentConfig& c) { return json(c.world.spawn_spacing); }},
        {"world.spawn_density",
         [](ExperimentConfig& c, const json& v) {
             c.world.spawn_density = as_number("world.spawn_density", v);
         },
         [](const ExperimentConfig& c) { return json(c.world.spawn_density); }},

        {"link.variant",
         [](ExperimentConfig& c, const json& v) {
             c.link.variant = variant_from_string("link.variant", as_string("link.variant", v));
         },
         [](const ExperimentConfig& c) { return json(to_string(c.link.variant)); }},
        {"link.unit_disk_radius",
         [](ExperimentConfig& c, const json& v) {
             c.link.unit_disk_radius = as_number("link.unit_disk_radius", v);
         },
         [](const ExperimentConfig& c) { return json(c.link.unit_disk_radius); }},
        {"link.tx_power_dbm",
         [](ExperimentConfig& c, const json& v) {
             c.link.tx_power_dbm = as_number("link.tx_power_dbm", v);
         },
         [](const ExperimentConfig& c) { return json(c.link.tx_power_dbm); }},
        {"link.frequency_hz",
         [](ExperimentConfig& c, const json& v) {
             c.link.frequency_hz = as_number("link.frequency_hz", v);
         },
         [](const ExperimentConfig& c) { return json(c.link.frequency_hz); }},
        {"link.random_loss_max_db",
         [](ExperimentConfig& c, const json& v) {
             c.link.random_loss_max_db = as_number("link.random_loss_max_db", v);
         },
         [](const ExperimentConfig& c) { return json(c.link.random_loss_max_db); }},
        {"link.resample_displacement_m",
         [](ExperimentConfig& c, const json& v) {
             c.link.resample_displacement_m = as_number("link.resample_displacement_m", v);
         },
         [](const ExperimentConfig& c) { return json(c.link.resample_displacement_m); }},
        {"link.waterfall_lo_dbm",
         [](ExperimentConfig& c, const json& v) {
             c.link.waterfall_lo_dbm = as_number("link.waterfall_lo_dbm", v);
         },
         [](const ExperimentConfig& c) { return json(c.link.waterfall_lo_dbm); }},
        {"link.waterfall_hi_dbm",
         [](ExperimentConfig& c, const json& v) {
             c.link.waterfall_hi_dbm = as_number("link.waterfall_hi_dbm", v);
         },
         [](const ExperimentConfig& c) { return json(c.link.waterfall_hi_dbm); }},
        {"link.obstacles",
         [](ExperimentConfig& c, const json& v) {
             if (!v.is_array()) throw ConfigError("config key 'link.obstacles' must be an array");
             c.link.obstacles.clear();
             for (const auto& seg : v) {
                 if (!seg.is_array() || seg.size() != 4)
                     throw ConfigError(
                         "config key 'link.obstacles' entries must be [x1, y1, x2, y2]");
                 c.link.obstacles.push_back(
                     {{seg[0].get<double>(), seg[1].get<double>()},
                      {seg[2].get<double>(), seg[3].get<double>()}});
             }
         },
         [](const ExperimentConfig& c) {
             json arr = json::array();
             for (const Segment& s : c.link.obstacles)
                 arr.push_back({s.a.x, s.a.y, s.b.x, s.b.y});
             return arr;
         }},

        {"mac.slotframe_length",
         [](ExperimentConfig& c, const json& v) {
             c.mac.frame.length = static_cast<int>(as_integer("mac.slotframe_length", v));
         },
         [](const ExperimentConfig& c) { return json(c.mac.frame.length); }},
        {"mac.slot_duration_s",
         [](ExperimentConfig& c, const json& v) {
             c.mac.frame.slot_duration = as_number("mac.slot_duration_s", v);
         },
         [](const ExperimentConfig& c) { return json(c.mac.frame.slot_duration); }},
        {"mac.hopping_sequence",
         [](ExperimentConfig& c, const json& v) {
             if (!v.is_array())
                 throw ConfigError("config key 'mac.hopping_sequence' must be an array");
             c.mac.frame.hopping_sequence.clear();
             for (const auto& e : v)
                 c.mac.frame.hopping_sequence.push_back(
                     static_cast<int>(as_integer("mac.hopping_sequence", e)));
         },
         [](const ExperimentConfig& c) { return json(c.mac.frame.hopping_sequence); }},
        {"mac.channel_offset",
         [](ExperimentConfig& c, const json& v) {
             c.mac.frame.channel_offset = static_cast<int>(as_integer("mac.channel_offset", v));
         },
         [](const ExperimentConfig& c) { return json(c.mac.frame.channel_offset); }},
        {"mac.join_timeout_slots",
         [](ExperimentConfig& c, const json& v) {
             c.mac.join_timeout_slots = as_integer("mac.join_timeout_slots", v);
         },
         [](const ExperimentConfig& c) { return json(c.mac.join_timeout_slots); }},

        {"control.controller",
         [](ExperimentConfig& c, const json& v) {
             c.control.controller =
                 controller_from_string("control.controller", as_string("control.controller", v));
             if (c.control.controller == ControllerKind::leader_follower)
                 c.control.flock.variant = FlockVariant::leader_follower;
             if (c.control.controller == ControllerKind::emergent)
                 c.control.flock.variant = FlockVariant::emergent;
         },
         [](const ExperimentConfig& c) { return json(to_string(c.control.controller)); }},
        {"control.r_collision_m",
         [](ExperimentConfig& c, const json& v) {
             c.control.flock.r_collision = as_number("control.r_collision_m", v);
         },
         [](const ExperimentConfig& c) { return json(c.control.flock.r_collision); }},
        {"control.r_flock_m",
         [](ExperimentConfig& c, const json& v) {
             c.control.flock.r_flock = as_number("control.r_flock_m", v);
         },
         [](const ExperimentConfig& c) { return json(c.control.flock.r_flock); }},
        {"control.leader_speed_mps",
         [](ExperimentConfig& c, const json& v) {
             c.control.flock.leader_speed = as_number("control.leader_speed_mps", v);
         },
         [](const ExperimentConfig& c) { return json(c.control.flock.leader_speed); }},
        {"control.leader_direction",
         [](ExperimentConfig& c, const json& v) {
             if (!v.is_array() || v.size() != 2)
                 throw ConfigError("config key 'control.leader_direction' must be [x, y]");
             const Vec2 dir{v[0].get<double>(), v[1].get<double>()};
             if (norm(dir) == 0.0)
                 throw ConfigError("config key 'control.leader_direction' must be non-zero");
             c.control.flock.leader_direction = normalized(dir);
         },
         [](const ExperimentConfig& c) {
             return json({c.control.flock.leader_direction.x, c.control.flock.leader_direction.y});
         }},
        {"control.leader_weight",
         [](ExperimentConfig& c, const json& v) {
             c.control.flock.leader_weight = as_number("control.leader_weight", v);
         },
         [](const ExperimentConfig& c) { return json(c.control.flock.leader_weight); }},
        {"control.potential",
         [](ExperimentConfig& c, const json& v) {
             c.control.flock.potential =
                 potential_from_string("control.potential", as_string("control.potential", v));
         },
         [](const ExperimentConfig& c) {
             return json(c.control.flock.potential == PotentialKind::softened ? "softened"
                                                                              : "singular");
         }},
        {"control.stale_timeout_slotframes",
         [](ExperimentConfig& c, const json& v) {
             c.control.stale_timeout_slotframes =
                 static_cast<int>(as_integer("control.stale_timeout_slotframes", v));
         },
         [](const ExperimentConfig& c) { return json(c.control.stale_timeout_slotframes); }},
        {"control.formation_gain",
         [](ExperimentConfig& c, const json& v) {
             c.control.formation.gain = as_number("control.formation_gain", v);
         },
         [](const ExperimentConfig& c) { return json(c.control.formation.gain); }},
        {"control.stop_epsilon_m",
         [](ExperimentConfig& c, const json& v) {
             c.control.formation.stop_epsilon = as_number("control.stop_epsilon_m", v);
         },
         [](const ExperimentConfig& c) { return json(c.control.formation.stop_epsilon); }},
        {"control.timing",
         [](ExperimentConfig& c, const json& v) {
             c.control.timing = timing_from_string("control.timing", as_string("control.timing", v));
         },
         [](const ExperimentConfig& c) { return json(to_string(c.control.timing)); }},
        {"control.timing_k",
         [](ExperimentConfig& c, const json& v) {
             c.control.timing_k = static_cast<int>(as_integer("control.timing_k", v));
         },
         [](const ExperimentConfig& c) { return json(c.control.timing_k); }},

        {"metrics.convergence_epsilon_mps",
         [](ExperimentConfig& c, const json& v) {
             c.metrics.convergence_epsilon = as_number("metrics.convergence_epsilon_mps", v);
         },
         [](const ExperimentConfig& c) { return json(c.metrics.convergence_epsilon); }},
        {"metrics.convergence_hold_steps",
         [](ExperimentConfig& c, const json& v) {
             c.metrics.convergence_hold_steps =
                 static_cast<int>(as_integer("metrics.convergence_hold_steps", v));
         },
         [](const ExperimentConfig& c) { return json(c.metrics.convergence_hold_steps); }},
        {"metrics.residual_floor",
         [](ExperimentConfig& c, const json& v) {
             c.metrics.residual_floor = as_number("metrics.residual_floor", v);
         },
         [](const ExperimentConfig& c) { return json(c.metrics.residual_floor); }},

        {"run.mode",
         [](ExperimentConfig& c, const json& v) {
             c.run.mode = mode_from_string("run.mode", as_string("run.mode", v));
         },
         [](const ExperimentConfig& c) { return json(to_string(c.run.mode)); }},
        {"run.control_period_s",
         [](ExperimentConfig& c, const json& v) {
             c.run.control_period = as_number("run.control_period_s", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.control_period); }},
        {"run.horizon_steps",
         [](ExperimentConfig& c, const json& v) {
             c.run.horizon_steps = as_integer("run.horizon_steps", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.horizon_steps); }},
        {"run.trials",
         [](ExperimentConfig& c, const json& v) {
             c.run.trials = static_cast<int>(as_integer("run.trials", v));
         },
         [](const ExperimentConfig& c) { return json(c.run.trials); }},
        {"run.master_seed",
         [](ExperimentConfig& c, const json& v) {
             c.run.master_seed = as_u64("run.master_seed", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.master_seed); }},
        {"run.output_dir",
         [](ExperimentConfig& c, const json& v) {
             c.run.output_dir = as_string("run.output_dir", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.output_dir); }},
        {"run.trace_stride",
         [](ExperimentConfig& c, const json& v) {
             c.run.trace_stride = as_integer("run.trace_stride", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.trace_stride); }},
        {"run.log_deliveries",
         [](ExperimentConfig& c, const json& v) {
             c.run.log_deliveries = as_bool("run.log_deliveries", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.log_deliveries); }},
        {"run.stop_at_formation",
         [](ExperimentConfig& c, const json& v) {
             c.run.stop_at_formation = as_bool("run.stop_at_formation", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.stop_at_formation); }},
        {"run.stop_at_convergence",
         [](ExperimentConfig& c, const json& v) {
             c.run.stop_at_convergence = as_bool("run.stop_at_convergence", v);
         },
         [](const ExperimentConfig& c) { return json(c.run.stop_at_convergence); }},
    };
    return defs;
}

const KeyDef* find_key(const std::string& name) {
    for (const KeyDef& def : registry()) {
        if (name == def.name) return &def;
    }
    return nullptr;
}

}  // namespace

ExperimentConfig parse_config(const json& flat) {
    if (!flat.is_object()) throw ConfigError("config document must be a JSON object");
    ExperimentConfig cfg;
    for (const auto& [key, value] : flat.items()) {
        const KeyDef* def = find_key(key);
        if (def == nullptr) throw ConfigError("unknown config key '" + key + "'");
        def->set(cfg, value);
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const KeyDef* def = find_key(key);
    if (def == nullptr) throw ConfigError("unknown config key '" + key + "'");
    // Accept either a JSON literal or a bare string (enum values, paths).
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value;
    }
    def->set(cfg, parsed);
}

ordered_json config_to_flat_json(const ExperimentConfig& cfg) {
    ordered_json out;
    for (const KeyDef& def : registry()) out[def.name] = def.get(cfg);
    return out;
}

double resolved_dt(const ExperimentConfig& cfg) {
    if (cfg.world.dt > 0.0) return cfg.world.dt;
    return cfg.run.mode == SimMode::full_network ? cfg.mac.frame.slot_duration
                                                 : cfg.run.control_period;
}

void validate_config(const ExperimentConfig& cfg, std::vector<std::string>* warnings) {
    validate_world_config(cfg.world);
    validate_link_model(cfg.link);
    validate_slotframe(cfg.mac.frame);
    if (cfg.mac.join_timeout_slots < 1) throw ConfigError("mac.join_timeout_slots must be >= 1");

    const FlockParams& f = cfg.control.flock;
    if (!(f.r_collision > 0.0)) throw ConfigError("control.r_collision_m must be > 0");
    if (!(f.r_collision < f.r_flock))
        throw ConfigError("control.r_collision_m must be < control.r_flock_m");
    if (f.leader_speed < 0.0) throw ConfigError("control.leader_speed_mps must be >= 0");
    if (norm(f.leader_direction) == 0.0)
        throw ConfigError("control.leader_direction must be non-zero");
    if (!(cfg.control.formation.gain > 0.0)) throw ConfigError("control.formation_gain must be > 0");
    if (cfg.control.formation.stop_epsilon < 0.0)
        throw ConfigError("control.stop_epsilon_m must be >= 0");
    if (cfg.control.stale_timeout_slotframes < 1)
        throw ConfigError("control.stale_timeout_slotframes must be >= 1");
    if (cfg.control.timing_k < 1) throw ConfigError("control.timing_k must be >= 1");

    if (!(cfg.metrics.convergence_epsilon > 0.0))
        throw ConfigError("metrics.convergence_epsilon_mps must be > 0");
    if (cfg.metrics.convergence_hold_steps < 1)
        throw ConfigError("metrics.convergence_hold_steps must be >= 1");
    if (!(cfg.metrics.residual_floor > 0.0)) throw ConfigError("metrics.residual_floor must be > 0");

    if (!(cfg.run.control_period > 0.0)) throw ConfigError("run.control_period_s must be > 0");
    if (cfg.run.horizon_steps < 1) throw ConfigError("run.horizon_steps must be >= 1");
    if (cfg.run.trials < 1) throw ConfigError("run.trials must be >= 1");
    if (cfg.run.trace_stride < 0) throw ConfigError("run.trace_stride must be >= 0");
    if (cfg.run.output_dir.empty()) throw ConfigError("run.output_dir must be non-empty");

    if (warnings != nullptr && cfg.run.mode == SimMode::full_network && cfg.world.n_agents > 100) {
        warnings->push_back(
            "full_network with " + std::to_string(cfg.world.n_agents) +
            " agents: round-robin slotframes this long rarely form a network; "
            "consider run.mode=propagation_only");
    }
}

std::string to_string(SimMode m) {
    return m == SimMode::full_network ? "full_network" : "propagation_only";
}

std::string to_string(ControllerKind c) {
    switch (c) {
        case ControllerKind::leader_follower: return "leader_follower";
        case ControllerKind::emergent: return "emergent";
        case ControllerKind::formation: return "formation";
        case ControllerKind::hold_position: return "static";
    }
    return "?";
}

std::string to_string(ControlTiming t) {
    switch (t) {
        case ControlTiming::per_packet: return "per_packet";
        case ControlTiming::per_slotframe: return "per_slotframe";
        case ControlTiming::every_k_slots: return "every_k_slots";
    }
    return "?";
}

std::string to_string(LinkVariant v) {
    switch (v) {
        case LinkVariant::full_connectivity: return "full_connectivity";
        case LinkVariant::line_of_sight: return "line_of_sight";
        case LinkVariant::unit_disk: return "unit_disk";
        case LinkVariant::probabilistic_disk: return "probabilistic_disk";
        case LinkVariant::experimental_randomness: return "experimental_randomness";
    }
    return "?";
}

}  // namespace swarmnet
