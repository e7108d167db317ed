#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "swarmnet/rng.hpp"
#include "swarmnet/vec2.hpp"

namespace swarmnet {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
// Friis blows up at d = 0; anything closer than this is treated as 1 cm.
inline constexpr double kMinLinkDistance = 0.01;

enum class LinkVariant {
    full_connectivity,
    line_of_sight,
    unit_disk,
    probabilistic_disk,
    experimental_randomness,
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

struct LinkModel {
    LinkVariant variant = LinkVariant::unit_disk;
    double unit_disk_radius = 10.0;      // m
    std::vector<Segment> obstacles;      // line_of_sight only
    double tx_power_dbm = 0.0;
    double frequency_hz = 2.4e9;
    double random_loss_max_db = 40.0;
    double resample_displacement_m = 0.5;
    double waterfall_lo_dbm = -97.0;     // pdr = 0 at or below
    double waterfall_hi_dbm = -87.0;     // pdr = 1 at or above
};

// Per unordered pair state. For experimental randomness the random loss draw
// is pinned to the positions it was sampled at and reused until either
// endpoint moves more than resample_displacement_m.
struct LinkState {
    int i = -1;
    int j = -1;
    double rssi_dbm = 0.0;
    double pdr = 0.0;
    Vec2 last_sample_pos_i;
    Vec2 last_sample_pos_j;
    double random_loss_db = 0.0;
    bool has_sample = false;
};

// Free-space received power for a transmitter at tx_power_dbm.
// Distances below kMinLinkDistance are clamped.
double friis_rssi(double distance_m, double tx_power_dbm, double frequency_hz);

// Piecewise-linear receiver waterfall: 0 below lo, 1 above hi, linear between.
double rssi_to_pdr(double rssi_dbm, double lo_dbm = -97.0, double hi_dbm = -87.0);

// True iff the open segment pos_i -> pos_j crosses any obstacle segment.
bool los_blocked(Vec2 pos_i, Vec2 pos_j, std::span<const Segment> obstacles);

// Evaluates one link under the model. `prior` may be null (treated as
// "always resample" for the stateful variant).
LinkState link_pdr(const LinkModel& model, Vec2 pos_i, Vec2 pos_j,
                   const LinkState* prior, RngStream& rng);

void validate_link_model(const LinkModel& model);

// Owns the per-pair link cache for one trial. Only experimental randomness
// keeps state; the other variants evaluate statelessly. Storage is a compact
// float triangle so n in the low thousands stays cheap.
class LinkField {
public:
    LinkField(LinkModel model, int n_agents);

    struct Sample {
        double rssi_dbm;
        double pdr;
    };
    Sample evaluate(int i, int j, Vec2 pos_i, Vec2 pos_j, RngStream& rng);

    const LinkModel& model() const { return model_; }

private:
    struct PairSample {
        float loss_db = 0.0f;
        float pix = 0.0f, piy = 0.0f, pjx = 0.0f, pjy = 0.0f;
        bool valid = false;
    };
    std::size_t pair_index(int i, int j) const;

    LinkModel model_;
    int n_ = 0;
    bool stateful_ = false;
    std::vector<PairSample> pairs_;
};

}  // namespace swarmnet
