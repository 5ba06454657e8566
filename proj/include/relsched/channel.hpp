#pragma once

#include <random>
#include <vector>

#include "relsched/config.hpp"
#include "relsched/state.hpp"

namespace relsched {

// Per-user relay ordering d_{i,1}..d_{i,M} by link quality to that user,
// worst first: the highest rank is the relay with the smallest failure
// parameter eta.  Ties break toward the lower relay id at the lower rank.
struct RelayRanking {
    std::vector<std::vector<int>> order;    // [user][rank-1] = relay id
    std::vector<std::vector<int>> rank_of;  // [user][relay id] = rank in 1..M

    int relay_at(int user, int rank) const { return order[user][rank - 1]; }
};

RelayRanking rank_relays(const SystemConfig& cfg);

// Decode-failure probability families.  Every link follows the same
// parametric form eta * rho^r, truncated to 0 at r = r^max so a packet's
// final allowed attempt always succeeds.
class DecodeModel {
public:
    explicit DecodeModel(SystemConfig cfg);

    const SystemConfig& config() const { return cfg_; }
    const RelayRanking& ranking() const { return ranking_; }

    // Failure probability for user i on attempt r from the base station.
    double user_failure_bs(int i, int r) const;

    // Failure probability for user i on attempt r from the rank-l relay.
    double user_failure_relay(int i, int rank, int r) const;

    // Failure probability of the rank-l relay overhearing attempt r of user
    // i's packet.  tx_rank 0 means the base station transmits; a relay does
    // not receive its own transmission.
    double relay_overhear_failure(int i, int target_rank, int tx_rank, int r) const;

    // Failure probability for the scheduled user under a decision's
    // transmitter.
    double user_failure(int i, int transmitter, int r) const;

    // Draws the slot outcome: the scheduled user's decode, independent
    // overhear draws for every non-transmitting relay that does not yet hold
    // the packet, and per-user Poisson arrivals.
    SlotOutcome sample_outcome(std::mt19937_64& rng, const SchedulingDecision& decision,
                               const SystemState& state) const;

private:
    void check_retx(int i, int r) const;

    SystemConfig cfg_;
    RelayRanking ranking_;
};

}  // namespace relsched
