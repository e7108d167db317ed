#pragma once

#include <cstdint>
#include <vector>

#include "swarmnet/rng.hpp"
#include "swarmnet/vec2.hpp"

namespace swarmnet {

enum class Role { leader, follower };

// Point-mass agent with velocity-controlled dynamics.
struct AgentState {
    int id = 0;
    Vec2 position;
    Vec2 velocity;
    Role role = Role::follower;
};

enum class SpawnKind { line, disk };

struct WorldConfig {
    int n_agents = 10;
    double v_max = 30.0;        // m/s
    double dt = 0.0;            // s per step; 0 = derived from the run mode
    SpawnKind spawn = SpawnKind::line;
    double spawn_spacing = 2.0; // m between agents on the line
    double spawn_density = 5.0; // agents/m^2 for the disk
};

// Radius of the spawn disk holding n agents at the requested density.
double disk_spawn_radius(int n, double density);

// Agent i at (i*spacing, 0), zero velocity, agent 0 is the leader.
std::vector<AgentState> spawn_line(int n, double spacing);

// n agents uniform in the disk of disk_spawn_radius(n, density) around the
// origin, zero velocity, agent 0 is the leader.
std::vector<AgentState> spawn_disk(int n, double density, RngStream& rng);

// velocity_i = clamp_norm(controls_i, v_max); position_i += velocity_i * dt.
void integrate_step(std::vector<AgentState>& agents, const std::vector<Vec2>& controls,
                    double dt, double v_max);

void validate_world_config(const WorldConfig& cfg);

}  // namespace swarmnet
