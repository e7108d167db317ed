#pragma once

#include <cstdint>
#include <vector>

#include "swarmnet/metrics.hpp"
#include "swarmnet/propagation.hpp"
#include "swarmnet/rng.hpp"
#include "swarmnet/world.hpp"

namespace swarmnet {

struct Slotframe {
    int length = 0;                  // slots; 0 = n_agents (RRSF default)
    double slot_duration = 0.01;     // s
    std::vector<int> hopping_sequence = {0, 1, 2,  3,  4,  5,  6,  7,
                                         8, 9, 10, 11, 12, 13, 14, 15};
    int channel_offset = 0;
};

int resolved_slotframe_length(const Slotframe& frame, int n_agents);
void validate_slotframe(const Slotframe& frame);

struct SlotAssignment {
    std::int64_t asn = 0;
    std::vector<int> tx;  // scheduled transmitters; exactly one under RRSF
    int channel = 0;
    // rx is every agent not in tx.
};

// RRSF: slot owner is asn mod n, everyone else listens; the channel walks
// the hopping sequence offset by channel_offset.
SlotAssignment rrsf_assignment(int n_agents, std::int64_t asn, const Slotframe& frame);

// Network join bookkeeping for the simplified join model.
struct JoinState {
    std::vector<char> joined;
    int joined_count = 0;
    int root = 0;
    std::int64_t formation_asn = -1;  // -1 = not yet formed
};

JoinState make_join_state(int n_agents, int root = 0);
bool network_formed(const JoinState& join);

// Marks unjoined agents that successfully received from a joined sender as
// joined (sender status taken at transmission time). Sets formation_asn when
// the last agent joins.
void join_step(JoinState& join, std::span<const Delivery> deliveries, std::int64_t asn);

struct SlotOutcome {
    std::int64_t deliveries_succeeded = 0;
    std::int64_t collision_drops = 0;  // audible receptions destroyed this slot
};

// Runs one slot: transmitters are the scheduled set plus extra_tx (unjoined
// announcers). A receiver hearing two or more audible (pdr > 0) transmitters
// gets nothing; exactly one audible transmitter is a Bernoulli(pdr) draw.
// Appends one Delivery row per audible (tx, rx) pair.
SlotOutcome deliver_slot(const SlotAssignment& assignment, std::span<const int> extra_tx,
                         const std::vector<AgentState>& agents, LinkField& links,
                         RngStream& link_rng, RngStream& delivery_rng,
                         std::vector<Delivery>& out);

}  // namespace swarmnet
