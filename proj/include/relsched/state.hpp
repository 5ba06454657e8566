#pragma once

#include <functional>
#include <vector>

#include "relsched/config.hpp"

namespace relsched {

// Per-user queue lengths and HoL transmission-attempt counts at the base
// station.  x_i == 0 forces r_i == 0.
struct BaseStationState {
    std::vector<int> queue_lengths;  // x_i
    std::vector<int> hol_retx;       // r_i for the HoL packet

    static BaseStationState empty(int num_users);
    bool all_empty() const;
};

// Decoded-HoL flags for one relay: decoded[i] == 1 means this relay holds
// user i's HoL packet and user i has not decoded it yet.
struct RelayState {
    std::vector<char> decoded;

    static RelayState empty(int num_users);
};

struct SystemState {
    BaseStationState bs;
    std::vector<RelayState> relays;

    static SystemState empty(const SystemConfig& cfg);
};

// Transmitter encoding: kBaseStation, or a relay id in 0..M-1.
inline constexpr int kBaseStation = -1;
inline constexpr int kNoUser = -1;

struct SchedulingDecision {
    int user = kNoUser;            // 0..N-1, or kNoUser when all queues are empty
    int transmitter = kBaseStation;

    bool is_idle() const { return user == kNoUser; }
};

struct SlotOutcome {
    bool user_decoded = false;
    std::vector<int> relay_decodes;  // relay ids that newly decoded this slot
    std::vector<int> arrivals;       // per user
};

struct ApplyResult {
    SystemState state;
    bool packet_discarded = false;  // failed at r^max under a model with g(r^max) > 0
};

// One-slot state update: transmission outcome, retention/flush rules, then
// arrivals.  Throws on a decision or outcome that violates the state
// invariants (e.g. a relay_decode for a relay that already holds the packet).
ApplyResult apply_outcome(const SystemState& state, const SchedulingDecision& decision,
                          const SlotOutcome& outcome, const SystemConfig& cfg);

// Validates the type invariants; used by tests and the oracle.
void check_state_invariants(const SystemState& state, const SystemConfig& cfg);

// Sum over users of c_{i,0}(x_i - 1) + c_{i,r_i} for nonempty queues.
double instantaneous_cost_linear(const BaseStationState& bs, const SystemConfig& cfg);

using QueueCostFn = std::function<double(int)>;

// Sum over users of U_i(x_i); independent of the retx counts.
double instantaneous_cost_convex(const BaseStationState& bs,
                                 const std::vector<QueueCostFn>& cost_fns);

// Rejects a cost function that is not strictly increasing on 0..max_queue
// or has U(0) != 0.
void check_cost_fns(const std::vector<QueueCostFn>& cost_fns, int max_queue);

}  // namespace relsched
