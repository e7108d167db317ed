#include "swarmnet/control.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "swarmnet/errors.hpp"

namespace swarmnet {

namespace {

// exp(d^2/r^2) overflows once believed neighbors drift far enough; saturate
// the pair force instead of propagating inf into the velocity clamp.
constexpr double kMaxPairForce = 1e12;

Vec2 cap_force(Vec2 f) {
    const double n = norm(f);
    if (std::isfinite(n) && n <= kMaxPairForce) return f;
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || n == 0.0) {
        return {kMaxPairForce, 0.0};
    }
    return f * (kMaxPairForce / n);
}

double safe_exp(double x) { return std::exp(std::min(x, 700.0)); }

}  // namespace

BeliefState make_belief(int owner, int n_agents) {
    BeliefState b;
    b.owner = owner;
    b.neighbors.resize(static_cast<std::size_t>(n_agents));
    return b;
}

void update_belief(BeliefState& belief, const Packet& packet, std::int64_t asn, int leader_id) {
    if (packet.src == belief.owner) return;
    assert(packet.src >= 0 && static_cast<std::size_t>(packet.src) < belief.neighbors.size());
    BeliefEntry& entry = belief.neighbors[static_cast<std::size_t>(packet.src)];
    entry.position = packet.position;
    entry.velocity = packet.velocity;
    entry.last_heard_asn = asn;
    if (packet.src == leader_id) {
        belief.leader_velocity = packet.velocity;
        belief.leader_last_heard_asn = asn;
    }
}

void prune_beliefs(BeliefState& belief, std::int64_t now_asn, std::int64_t stale_window) {
    for (BeliefEntry& e : belief.neighbors) {
        if (e.last_heard_asn >= 0 && now_asn - e.last_heard_asn > stale_window) {
            e.last_heard_asn = -1;
        }
    }
}

bool belief_entry_fresh(const BeliefEntry& entry, std::int64_t newest_allowed_asn,
                        std::int64_t stale_window) {
    if (entry.last_heard_asn < 0) return false;
    if (entry.last_heard_asn > newest_allowed_asn) return false;  // no clairvoyance
    return newest_allowed_asn - entry.last_heard_asn <= stale_window;
}

PotentialConstants potential_constants(double r_collision, double r_flock) {
    return {r_collision * r_collision + r_flock, r_flock};
}

double resolved_leader_weight(const FlockParams& params, int n_agents) {
    if (params.leader_weight > 0.0) return params.leader_weight;
    return std::max(1.0, static_cast<double>(n_agents) / 10.0);
}

double potential_value(Vec2 x_i, Vec2 x_j, double r_collision, double r_flock) {
    const auto [k_col, k_conn] = potential_constants(r_collision, r_flock);
    const double d2 = norm_sq(x_i - x_j);
    return k_col * safe_exp(-d2 / (r_collision * r_collision)) +
           k_conn * safe_exp(d2 / (r_flock * r_flock));
}

Vec2 potential_gradient(Vec2 x_i, Vec2 x_j, double r_collision, double r_flock) {
    const Vec2 delta = x_i - x_j;
    const double d2 = norm_sq(delta);
    if (d2 == 0.0) return {};  // symmetric tie-break
    const auto [k_col, k_conn] = potential_constants(r_collision, r_flock);
    const double rc2 = r_collision * r_collision;
    const double rf2 = r_flock * r_flock;
    const double bracket =
        -(2.0 * k_col / rc2) * safe_exp(-d2 / rc2) + (2.0 * k_conn / rf2) * safe_exp(d2 / rf2);
    return cap_force(delta * bracket);
}

double original_potential_value(Vec2 x_i, Vec2 x_j, double r_flock) {
    const double d2 = norm_sq(x_i - x_j);
    const double rf2 = r_flock * r_flock;
    if (d2 >= rf2)
        throw SingularPotentialError("original potential undefined at separation >= r_flock");
    if (d2 == 0.0)
        throw SingularPotentialError("original potential undefined at zero separation");
    return 1.0 / d2 + 1.0 / (rf2 - d2);
}

Vec2 original_potential_gradient(Vec2 x_i, Vec2 x_j, double r_flock) {
    const Vec2 delta = x_i - x_j;
    const double d2 = norm_sq(delta);
    const double rf2 = r_flock * r_flock;
    if (d2 >= rf2)
        throw SingularPotentialError("original potential gradient singular at separation >= r_flock");
    if (d2 == 0.0)
        throw SingularPotentialError("original potential gradient singular at zero separation");
    const double inv = rf2 - d2;
    const double bracket = 2.0 * (-1.0 / (d2 * d2) + 1.0 / (inv * inv));
    return cap_force(delta * bracket);
}

Vec2 flock_control(const BeliefState& belief, const AgentState& self, const FlockParams& params,
                   int n_agents, std::int64_t newest_allowed_asn, std::int64_t stale_window,
                   int leader_id) {
    if (self.role == Role::leader) {
        return params.leader_direction * params.leader_speed;
    }
    const double w_leader = resolved_leader_weight(params, n_agents);
    Vec2 command{};
    for (std::size_t j = 0; j < belief.neighbors.size(); ++j) {
        if (static_cast<int>(j) == belief.owner) continue;
        const BeliefEntry& entry = belief.neighbors[j];
        if (!belief_entry_fresh(entry, newest_allowed_asn, stale_window)) continue;
        const Vec2 grad =
            potential_gradient(self.position, entry.position, params.r_collision, params.r_flock);
        const double w = (static_cast<int>(j) == leader_id) ? w_leader : 1.0;
        command -= grad * w;
    }
    return command;  // empty belief -> zero command, the agent holds position
}

Vec2 emergent_flock_control(const BeliefState& belief, const AgentState& self,
                            const FlockParams& params, std::int64_t newest_allowed_asn,
                            std::int64_t stale_window, ControlDiagnostics* diag) {
    Vec2 command{};
    for (std::size_t j = 0; j < belief.neighbors.size(); ++j) {
        if (static_cast<int>(j) == belief.owner) continue;
        const BeliefEntry& entry = belief.neighbors[j];
        if (!belief_entry_fresh(entry, newest_allowed_asn, stale_window)) continue;
        command -= self.velocity - entry.velocity;  // directional alignment
        if (params.potential == PotentialKind::softened) {
            command -= potential_gradient(self.position, entry.position, params.r_collision,
                                          params.r_flock);
        } else {
            const double d = distance(self.position, entry.position);
            if (d > 0.0 && d < params.r_flock) {
                command -= original_potential_gradient(self.position, entry.position,
                                                       params.r_flock);
            } else if (diag != nullptr) {
                // Separation ran past the radius before this update: the
                // original law has no defined force here.
                diag->singularity_hit = true;
            }
        }
    }
    return command;
}

namespace {

// Principal axis from centered second moments; shared by the span and the
// streaming entry points so both fit the identical line.
LineFit fit_from_moments(Vec2 centroid, double sxx, double sxy, double syy) {
    LineFit fit;
    fit.point = centroid;
    fit.direction = {1.0, 0.0};
    if (sxx == 0.0 && syy == 0.0) return fit;  // all coincident: horizontal tie-break

    // Leading eigenvector of [[sxx, sxy], [sxy, syy]].
    const double trace_half = 0.5 * (sxx + syy);
    const double det = sxx * syy - sxy * sxy;
    const double lambda = trace_half + std::sqrt(std::max(trace_half * trace_half - det, 0.0));
    Vec2 dir;
    if (std::abs(sxy) > 1e-300) {
        dir = {lambda - syy, sxy};
    } else {
        dir = (sxx >= syy) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    }
    const double n = norm(dir);
    fit.direction = n > 0.0 ? dir / n : Vec2{1.0, 0.0};
    return fit;
}

}  // namespace

LineFit local_line_fit(std::span<const Vec2> points) {
    if (points.empty()) return {{}, {1.0, 0.0}};

    Vec2 centroid{};
    for (const Vec2& p : points) centroid += p;
    centroid = centroid / static_cast<double>(points.size());
    if (points.size() == 1) return {centroid, {1.0, 0.0}};

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Vec2& p : points) {
        const Vec2 d = p - centroid;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    return fit_from_moments(centroid, sxx, sxy, syy);
}

Vec2 project_onto_line(Vec2 p, const LineFit& line) {
    return line.point + line.direction * dot(p - line.point, line.direction);
}

double point_line_distance(Vec2 p, const LineFit& line) {
    return norm(p - project_onto_line(p, line));
}

Vec2 formation_control(const BeliefState& belief, const AgentState& self,
                       const FormationParams& params, std::int64_t newest_allowed_asn,
                       std::int64_t stale_window) {
    // Two streaming passes over the belief; no per-call buffer, which matters
    // when thousands of agents each see thousands of neighbors.
    Vec2 sum = self.position;
    std::size_t count = 1;
    for (std::size_t j = 0; j < belief.neighbors.size(); ++j) {
        if (static_cast<int>(j) == belief.owner) continue;
        const BeliefEntry& entry = belief.neighbors[j];
        if (!belief_entry_fresh(entry, newest_allowed_asn, stale_window)) continue;
        sum += entry.position;
        ++count;
    }
    const Vec2 centroid = sum / static_cast<double>(count);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    auto accumulate = [&](Vec2 p) {
        const Vec2 d = p - centroid;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    };
    accumulate(self.position);
    for (std::size_t j = 0; j < belief.neighbors.size(); ++j) {
        if (static_cast<int>(j) == belief.owner) continue;
        const BeliefEntry& entry = belief.neighbors[j];
        if (!belief_entry_fresh(entry, newest_allowed_asn, stale_window)) continue;
        accumulate(entry.position);
    }

    const LineFit fit = fit_from_moments(centroid, sxx, sxy, syy);
    const Vec2 target = project_onto_line(self.position, fit);
    const Vec2 offset = target - self.position;
    if (norm(offset) < params.stop_epsilon) return {};  // local "I have converged"
    return offset * params.gain;
}

}  // namespace swarmnet
