#include "swarmnet/world.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "swarmnet/errors.hpp"

namespace swarmnet {

double disk_spawn_radius(int n, double density) {
    return std::sqrt(static_cast<double>(n) / (std::numbers::pi * density));
}

std::vector<AgentState> spawn_line(int n, double spacing) {
    if (n < 1) throw ConfigError("spawn_line: n_agents must be >= 1, got " + std::to_string(n));
    if (!(spacing > 0.0)) throw ConfigError("spawn_line: spacing must be > 0");
    std::vector<AgentState> agents(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        agents[i].id = i;
        agents[i].position = {static_cast<double>(i) * spacing, 0.0};
        agents[i].role = (i == 0) ? Role::leader : Role::follower;
    }
    return agents;
}

std::vector<AgentState> spawn_disk(int n, double density, RngStream& rng) {
    if (n < 1) throw ConfigError("spawn_disk: n_agents must be >= 1, got " + std::to_string(n));
    if (!(density > 0.0)) throw ConfigError("spawn_disk: density must be > 0");
    const double radius = disk_spawn_radius(n, density);
    std::vector<AgentState> agents(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // sqrt(u) keeps the area density uniform.
        const double r = radius * std::sqrt(rng.uniform());
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        agents[i].id = i;
        agents[i].position = {r * std::cos(theta), r * std::sin(theta)};
        agents[i].role = (i == 0) ? Role::leader : Role::follower;
    }
    return agents;
}

void integrate_step(std::vector<AgentState>& agents, const std::vector<Vec2>& controls,
                    double dt, double v_max) {
    if (agents.size() != controls.size())
        throw std::logic_error("integrate_step: controls size " + std::to_string(controls.size()) +
                               " does not match agent count " + std::to_string(agents.size()));
    for (std::size_t i = 0; i < agents.size(); ++i) {
        agents[i].velocity = clamp_norm(controls[i], v_max);
        agents[i].position += agents[i].velocity * dt;
    }
}

void validate_world_config(const WorldConfig& cfg) {
    if (cfg.n_agents < 1) throw ConfigError("world.n_agents must be >= 1");
    if (!(cfg.v_max > 0.0)) throw ConfigError("world.v_max must be > 0");
    if (cfg.dt < 0.0) throw ConfigError("world.dt must be >= 0 (0 = derived)");
    if (cfg.spawn == SpawnKind::line && !(cfg.spawn_spacing > 0.0))
        throw ConfigError("world.spawn_spacing must be > 0");
    if (cfg.spawn == SpawnKind::disk && !(cfg.spawn_density > 0.0))
        throw ConfigError("world.spawn_density must be > 0");
}

}  // namespace swarmnet
