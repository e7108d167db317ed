#include "swarmnet/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "swarmnet/errors.hpp"

namespace swarmnet {

double friis_rssi(double distance_m, double tx_power_dbm, double frequency_hz) {
    const double d = std::max(distance_m, kMinLinkDistance);
    const double path_loss_db =
        20.0 * std::log10(4.0 * std::numbers::pi * d * frequency_hz / kSpeedOfLight);
    return tx_power_dbm - path_loss_db;
}

double rssi_to_pdr(double rssi_dbm, double lo_dbm, double hi_dbm) {
    if (rssi_dbm <= lo_dbm) return 0.0;
    if (rssi_dbm >= hi_dbm) return 1.0;
    return (rssi_dbm - lo_dbm) / (hi_dbm - lo_dbm);
}

namespace {

enum class Orientation { collinear, cw, ccw };

Orientation orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    if (v > 0.0) return Orientation::ccw;
    if (v < 0.0) return Orientation::cw;
    return Orientation::collinear;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Standard straddle test, collinear overlap counts as intersecting.
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const Orientation o1 = orientation(p1, p2, q1);
    const Orientation o2 = orientation(p1, p2, q2);
    const Orientation o3 = orientation(q1, q2, p1);
    const Orientation o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == Orientation::collinear && on_segment(p1, p2, q1)) return true;
    if (o2 == Orientation::collinear && on_segment(p1, p2, q2)) return true;
    if (o3 == Orientation::collinear && on_segment(q1, q2, p1)) return true;
    if (o4 == Orientation::collinear && on_segment(q1, q2, p2)) return true;
    return false;
}

}  // namespace

bool los_blocked(Vec2 pos_i, Vec2 pos_j, std::span<const Segment> obstacles) {
    for (const Segment& s : obstacles) {
        if (segments_intersect(pos_i, pos_j, s.a, s.b)) return true;
    }
    return false;
}

LinkState link_pdr(const LinkModel& model, Vec2 pos_i, Vec2 pos_j,
                   const LinkState* prior, RngStream& rng) {
    LinkState out;
    if (prior != nullptr) {
        out.i = prior->i;
        out.j = prior->j;
    }
    const double d = std::max(distance(pos_i, pos_j), kMinLinkDistance);
    out.last_sample_pos_i = pos_i;
    out.last_sample_pos_j = pos_j;

    switch (model.variant) {
        case LinkVariant::full_connectivity:
            out.rssi_dbm = friis_rssi(d, model.tx_power_dbm, model.frequency_hz);
            out.pdr = 1.0;
            break;
        case LinkVariant::line_of_sight:
            out.rssi_dbm = friis_rssi(d, model.tx_power_dbm, model.frequency_hz);
            out.pdr = los_blocked(pos_i, pos_j, model.obstacles) ? 0.0 : 1.0;
            break;
        case LinkVariant::unit_disk:
            out.rssi_dbm = friis_rssi(d, model.tx_power_dbm, model.frequency_hz);
            out.pdr = (d <= model.unit_disk_radius) ? 1.0 : 0.0;
            break;
        case LinkVariant::probabilistic_disk:
            // Deterministic worst case: the lower edge of the measured band.
            out.rssi_dbm = friis_rssi(d, model.tx_power_dbm, model.frequency_hz) -
                           model.random_loss_max_db;
            out.pdr = rssi_to_pdr(out.rssi_dbm, model.waterfall_lo_dbm, model.waterfall_hi_dbm);
            break;
        case LinkVariant::experimental_randomness: {
            bool reuse = false;
            if (prior != nullptr && prior->has_sample) {
                const double moved_i = distance(pos_i, prior->last_sample_pos_i);
                const double moved_j = distance(pos_j, prior->last_sample_pos_j);
                reuse = moved_i <= model.resample_displacement_m &&
                        moved_j <= model.resample_displacement_m;
            }
            if (reuse) {
                out.random_loss_db = prior->random_loss_db;
                out.last_sample_pos_i = prior->last_sample_pos_i;
                out.last_sample_pos_j = prior->last_sample_pos_j;
            } else {
                out.random_loss_db = rng.uniform(0.0, model.random_loss_max_db);
            }
            out.rssi_dbm = friis_rssi(d, model.tx_power_dbm, model.frequency_hz) -
                           out.random_loss_db;
            out.pdr = rssi_to_pdr(out.rssi_dbm, model.waterfall_lo_dbm, model.waterfall_hi_dbm);
            out.has_sample = true;
            break;
        }
    }
    return out;
}

void validate_link_model(const LinkModel& model) {
    if (model.variant == LinkVariant::unit_disk && !(model.unit_disk_radius > 0.0))
        throw ConfigError("link.unit_disk_radius must be > 0");
    if (model.random_loss_max_db < 0.0)
        throw ConfigError("link.random_loss_max_db must be >= 0");
    if (!(model.frequency_hz > 0.0)) throw ConfigError("link.frequency_hz must be > 0");
    if (model.resample_displacement_m < 0.0)
        throw ConfigError("link.resample_displacement_m must be >= 0");
    if (!(model.waterfall_lo_dbm < model.waterfall_hi_dbm))
        throw ConfigError("link.waterfall_lo_dbm must be below link.waterfall_hi_dbm");
}

LinkField::LinkField(LinkModel model, int n_agents)
    : model_(std::move(model)), n_(n_agents) {
    stateful_ = model_.variant == LinkVariant::experimental_randomness;
    if (stateful_ && n_ > 1) {
        pairs_.resize(static_cast<std::size_t>(n_) * (n_ - 1) / 2);
    }
}

std::size_t LinkField::pair_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    // Row-major upper triangle, row i spans (n-1-i) entries.
    const auto n = static_cast<std::size_t>(n_);
    const auto di = static_cast<std::size_t>(i);
    const auto dj = static_cast<std::size_t>(j);
    return di * (2 * n - di - 1) / 2 + (dj - di - 1);
}

LinkField::Sample LinkField::evaluate(int i, int j, Vec2 pos_i, Vec2 pos_j, RngStream& rng) {
    if (i > j) {
        std::swap(i, j);
        std::swap(pos_i, pos_j);
    }
    if (!stateful_) {
        const LinkState s = link_pdr(model_, pos_i, pos_j, nullptr, rng);
        return {s.rssi_dbm, s.pdr};
    }
    PairSample& cached = pairs_[pair_index(i, j)];
    LinkState prior;
    prior.i = i;
    prior.j = j;
    if (cached.valid) {
        prior.has_sample = true;
        prior.random_loss_db = cached.loss_db;
        prior.last_sample_pos_i = {cached.pix, cached.piy};
        prior.last_sample_pos_j = {cached.pjx, cached.pjy};
    }
    const LinkState s = link_pdr(model_, pos_i, pos_j, &prior, rng);
    cached.valid = true;
    cached.loss_db = static_cast<float>(s.random_loss_db);
    cached.pix = static_cast<float>(s.last_sample_pos_i.x);
    cached.piy = static_cast<float>(s.last_sample_pos_i.y);
    cached.pjx = static_cast<float>(s.last_sample_pos_j.x);
    cached.pjy = static_cast<float>(s.last_sample_pos_j.y);
    return {s.rssi_dbm, s.pdr};
}

}  // namespace swarmnet
