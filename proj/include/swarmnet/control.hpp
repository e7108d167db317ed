#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "swarmnet/vec2.hpp"
#include "swarmnet/world.hpp"

namespace swarmnet {

struct Packet {
    int src = 0;
    Vec2 position;
    Vec2 velocity;
    std::int64_t asn = 0;
};

struct BeliefEntry {
    Vec2 position;
    Vec2 velocity;
    std::int64_t last_heard_asn = -1;  // -1 = never heard
};

// What one agent knows about the others, built solely from received packets.
struct BeliefState {
    int owner = 0;
    std::vector<BeliefEntry> neighbors;  // dense by agent id; owner's slot unused
    std::optional<Vec2> leader_velocity;
    std::int64_t leader_last_heard_asn = -1;
};

BeliefState make_belief(int owner, int n_agents);

// Overwrites the sender's entry and stamps it with the delivery asn.
// Packets from the owner itself are ignored.
void update_belief(BeliefState& belief, const Packet& packet, std::int64_t asn,
                   int leader_id = 0);

// Drops entries last heard more than stale_window slots before now_asn.
void prune_beliefs(BeliefState& belief, std::int64_t now_asn, std::int64_t stale_window);

// An entry is usable iff it was heard (stamp >= 0), is not from the future
// relative to newest_allowed, and is at most stale_window slots old.
bool belief_entry_fresh(const BeliefEntry& entry, std::int64_t newest_allowed_asn,
                        std::int64_t stale_window);

enum class FlockVariant { leader_follower, emergent };
enum class PotentialKind { softened, singular };

struct FlockParams {
    double r_collision = 0.8;  // m
    double r_flock = 10.0;     // m
    double leader_speed = 4.5; // m/s
    Vec2 leader_direction{1.0, 0.0};
    double leader_weight = 0.0;  // <= 0: auto max(1, n_agents/10)
    FlockVariant variant = FlockVariant::leader_follower;
    PotentialKind potential = PotentialKind::softened;
};

struct PotentialConstants {
    double k_col = 0.0;   // r_collision^2 + r_flock
    double k_conn = 0.0;  // r_flock
};

PotentialConstants potential_constants(double r_collision, double r_flock);
double resolved_leader_weight(const FlockParams& params, int n_agents);

// Singularity-free pairwise potential and its gradient with respect to x_i:
//   V~ = K_col * exp(-d^2/r_collision^2) + K_conn * exp(d^2/r_flock^2).
double potential_value(Vec2 x_i, Vec2 x_j, double r_collision, double r_flock);
Vec2 potential_gradient(Vec2 x_i, Vec2 x_j, double r_collision, double r_flock);

// Original potential 1/d^2 + 1/(r_flock^2 - d^2) and its gradient. Only
// defined for 0 < d < r_flock; at or beyond the flocking radius it throws
// SingularPotentialError (the documented failure mode, surfaced not masked).
double original_potential_value(Vec2 x_i, Vec2 x_j, double r_flock);
Vec2 original_potential_gradient(Vec2 x_i, Vec2 x_j, double r_flock);

struct ControlDiagnostics {
    bool singularity_hit = false;
};

// Leader: v* = leader_speed * leader_direction.
// Follower: -sum_j w_j * grad V~(x_self, x_j_believed) over fresh entries,
// where the leader's summand is weighted by resolved_leader_weight.
Vec2 flock_control(const BeliefState& belief, const AgentState& self, const FlockParams& params,
                   int n_agents, std::int64_t newest_allowed_asn, std::int64_t stale_window,
                   int leader_id = 0);

// Velocity-consensus flocking: -sum_j (v_self - v_j) - sum_j grad V, with the
// potential selectable between the softened and the original singular form.
Vec2 emergent_flock_control(const BeliefState& belief, const AgentState& self,
                            const FlockParams& params, std::int64_t newest_allowed_asn,
                            std::int64_t stale_window, ControlDiagnostics* diag = nullptr);

struct LineFit {
    Vec2 point;      // centroid of the fitted points
    Vec2 direction;  // unit vector along the line
};

// Orthogonal regression (principal axis) through the centroid. One point or
// all-coincident points fall back to the horizontal line through the point.
LineFit local_line_fit(std::span<const Vec2> points);

double point_line_distance(Vec2 p, const LineFit& line);
Vec2 project_onto_line(Vec2 p, const LineFit& line);

struct FormationParams {
    double gain = 1.0;          // 1/s
    double stop_epsilon = 0.01; // m; closer than this commands zero
};

// Moves the agent toward its projection on the line fitted through its own
// position and all fresh believed neighbor positions.
Vec2 formation_control(const BeliefState& belief, const AgentState& self,
                       const FormationParams& params, std::int64_t newest_allowed_asn,
                       std::int64_t stale_window);

}  // namespace swarmnet
