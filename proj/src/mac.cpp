#include "swarmnet/mac.hpp"

#include <algorithm>
#include <unordered_set>

#include "swarmnet/errors.hpp"

namespace swarmnet {

int resolved_slotframe_length(const Slotframe& frame, int n_agents) {
    return frame.length > 0 ? frame.length : n_agents;
}

void validate_slotframe(const Slotframe& frame) {
    if (frame.length < 0) throw ConfigError("mac.slotframe_length must be >= 0 (0 = n_agents)");
    if (!(frame.slot_duration > 0.0)) throw ConfigError("mac.slot_duration_s must be > 0");
    if (frame.hopping_sequence.empty())
        throw ConfigError("mac.hopping_sequence must be non-empty");
    std::unordered_set<int> seen;
    for (int c : frame.hopping_sequence) {
        if (!seen.insert(c).second)
            throw ConfigError("mac.hopping_sequence entries must be unique");
    }
}

SlotAssignment rrsf_assignment(int n_agents, std::int64_t asn, const Slotframe& frame) {
    SlotAssignment a;
    a.asn = asn;
    a.tx.push_back(static_cast<int>(asn % n_agents));
    const auto hop = static_cast<std::int64_t>(frame.hopping_sequence.size());
    a.channel = frame.hopping_sequence[static_cast<std::size_t>(
        ((asn + frame.channel_offset) % hop + hop) % hop)];
    return a;
}

JoinState make_join_state(int n_agents, int root) {
    JoinState j;
    j.joined.assign(static_cast<std::size_t>(n_agents), 0);
    j.joined[static_cast<std::size_t>(root)] = 1;
    j.joined_count = 1;
    j.root = root;
    if (n_agents == 1) j.formation_asn = 0;  // the root alone is the network
    return j;
}

bool network_formed(const JoinState& join) { return join.formation_asn >= 0; }

void join_step(JoinState& join, std::span<const Delivery> deliveries, std::int64_t asn) {
    if (network_formed(join)) return;
    // Joined status snapshot from slot start: two unjoined agents cannot
    // chain-join through each other within one slot.
    std::vector<int> newly_joined;
    for (const Delivery& d : deliveries) {
        if (!d.success) continue;
        if (!join.joined[static_cast<std::size_t>(d.src)]) continue;
        if (join.joined[static_cast<std::size_t>(d.dst)]) continue;
        if (std::find(newly_joined.begin(), newly_joined.end(), d.dst) == newly_joined.end())
            newly_joined.push_back(d.dst);
    }
    for (int agent : newly_joined) {
        join.joined[static_cast<std::size_t>(agent)] = 1;
        ++join.joined_count;
    }
    if (join.joined_count == static_cast<int>(join.joined.size()) && join.formation_asn < 0) {
        join.formation_asn = asn;
    }
}

SlotOutcome deliver_slot(const SlotAssignment& assignment, std::span<const int> extra_tx,
                         const std::vector<AgentState>& agents, LinkField& links,
                         RngStream& link_rng, RngStream& delivery_rng,
                         std::vector<Delivery>& out) {
    SlotOutcome outcome;
    const int n = static_cast<int>(agents.size());

    std::vector<int> transmitters = assignment.tx;
    for (int t : extra_tx) {
        if (std::find(transmitters.begin(), transmitters.end(), t) == transmitters.end())
            transmitters.push_back(t);
    }
    std::sort(transmitters.begin(), transmitters.end());
    if (transmitters.empty()) return outcome;

    std::vector<char> is_tx(static_cast<std::size_t>(n), 0);
    for (int t : transmitters) is_tx[static_cast<std::size_t>(t)] = 1;

    // Link evaluation order is fixed (tx ascending, then rx ascending) so the
    // rng consumption, and therefore the whole trial, is reproducible.
    struct Audible {
        int tx;
        double pdr;
        double rssi;
    };
    std::vector<std::vector<Audible>> audible(static_cast<std::size_t>(n));
    for (int t : transmitters) {
        for (int r = 0; r < n; ++r) {
            if (is_tx[static_cast<std::size_t>(r)]) continue;  // tx cannot also receive
            const LinkField::Sample s = links.evaluate(
                t, r, agents[static_cast<std::size_t>(t)].position,
                agents[static_cast<std::size_t>(r)].position, link_rng);
            if (s.pdr > 0.0) {
                audible[static_cast<std::size_t>(r)].push_back({t, s.pdr, s.rssi_dbm});
            }
        }
    }

    for (int r = 0; r < n; ++r) {
        const auto& heard = audible[static_cast<std::size_t>(r)];
        if (heard.empty()) continue;
        const bool collision = heard.size() >= 2;
        for (const Audible& h : heard) {
            Delivery d;
            d.asn = assignment.asn;
            d.src = h.tx;
            d.dst = r;
            d.rssi_dbm = h.rssi;
            d.channel = assignment.channel;
            d.collision = collision;
            if (collision) {
                d.success = false;
                ++outcome.collision_drops;
            } else {
                d.success = delivery_rng.bernoulli(h.pdr);
            }
            if (d.success) ++outcome.deliveries_succeeded;
            out.push_back(d);
        }
    }
    return outcome;
}

}  // namespace swarmnet
