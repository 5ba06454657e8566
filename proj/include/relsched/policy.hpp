#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relsched/channel.hpp"
#include "relsched/config.hpp"
#include "relsched/klimov.hpp"
#include "relsched/state.hpp"

namespace relsched {

enum class PolicyKind { RlpaIndex, RdcIndex, NoRelayIndex, RoundRobin, LongestQueue };

std::string to_string(PolicyKind kind);
std::optional<PolicyKind> policy_from_string(const std::string& name);

struct IndexedTransmitter {
    double index = 0.0;
    int transmitter = kBaseStation;
};

// Immutable scheduling policy with all index tables precomputed; decide()
// is a pure table lookup plus argmax.
class Scheduler {
public:
    // For RdcIndex, initial_queues and cost_fns describe the draining
    // instance; other kinds ignore them.
    Scheduler(PolicyKind kind, const DecodeModel& model,
              const std::vector<int>& initial_queues = {},
              const std::vector<QueueCostFn>& cost_fns = {});

    PolicyKind kind() const { return kind_; }

    // Highest index over {base station} + decoded relays for user i's HoL
    // packet.  A relay wins only on a strict improvement; relay ties go to
    // the lower relay id.
    IndexedTransmitter rlpa_index(int user, int retx,
                                  const std::vector<RelayState>& relays) const;

    // Pure decision: slot feeds only the round-robin rotation.
    SchedulingDecision decide(const SystemState& state, long long slot = 0) const;

    // The draining priority order (RdcIndex only).
    const PriorityOrdering& rdc_ordering() const;
    const KlimovInstance& rdc_instance() const;

    // Closed-form family service time for (user, relay rank, retx).
    double service_time(int user, int rank, int retx) const;

    struct IndexRow {
        int user;
        int retx;
        int relay_rank;
        int transmitter;  // kBaseStation or relay id
        double service_time;
        double cost_rate;
        double index;
    };
    // Exhaustive (user, retx, rank) index table for the arrivals problem.
    std::vector<IndexRow> index_table() const;
    static std::string index_table_csv(const std::vector<IndexRow>& rows);

private:
    SchedulingDecision decide_by_index(const SystemState& state, bool allow_relays) const;
    SchedulingDecision decide_rdc(const SystemState& state) const;

    PolicyKind kind_;
    const DecodeModel* model_;
    std::vector<std::vector<std::vector<double>>> family_time_;   // [user][rank][retx]
    std::vector<std::vector<std::vector<double>>> family_index_;  // [user][rank][retx]
    std::shared_ptr<const KlimovInstance> rdck_;
    std::shared_ptr<const PriorityOrdering> rdck_order_;
    std::vector<int> rdck_rank_;  // label index -> priority position (smaller = higher)
};

}  // namespace relsched
