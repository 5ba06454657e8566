#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "relsched/channel.hpp"
#include "relsched/config.hpp"
#include "relsched/policy.hpp"
#include "relsched/state.hpp"

namespace relsched {

// Exhaustive state space of (queue lengths, HoL retx counts, relay flags)
// under per-user queue caps, with relay-flag reachability enforced.
struct StateSpace {
    SystemConfig config;
    std::vector<int> queue_caps;  // per user
    std::vector<SystemState> states;
    std::unordered_map<std::uint64_t, int> index;

    int id_of(const SystemState& state) const;
    int size() const { return static_cast<int>(states.size()); }
};

std::uint64_t encode_state(const SystemState& state, const SystemConfig& cfg);

StateSpace enumerate_states(const SystemConfig& cfg, const std::vector<int>& queue_caps,
                            long long max_states = 1'000'000);
StateSpace enumerate_states(const SystemConfig& cfg, int queue_cap,
                            long long max_states = 1'000'000);

// Valid decisions in a state: every (nonempty user, base station or decoded
// relay) pair, or the idle decision when all queues are empty.
std::vector<SchedulingDecision> valid_decisions(const SystemState& state,
                                                const SystemConfig& cfg);

// Exact one-step kernel row.  Arrivals beyond a user's queue cap are
// dropped, with the excess probability mass lumped on the cap.
std::vector<std::pair<int, double>> transition_row(const StateSpace& space,
                                                   const DecodeModel& model, int state_id,
                                                   const SchedulingDecision& decision);

using StageCost = std::function<double(const SystemState&)>;
using PolicyFn = std::function<SchedulingDecision(const SystemState&)>;

struct DrainingSolution {
    std::vector<double> value;               // optimal total cost per state
    std::vector<SchedulingDecision> action;  // an optimal decision per state
};

// Exact total-cost optimality for the no-arrivals problem.  The chain is
// acyclic in (sum x descending, sum r ascending), so one backward pass
// solves it; requires a decode model with certain success at r^max.
DrainingSolution solve_draining(const StateSpace& space, const DecodeModel& model,
                                const StageCost& cost);

// Exact total cost of a fixed policy on the draining chain.
std::vector<double> evaluate_draining_policy(const StateSpace& space, const DecodeModel& model,
                                             const StageCost& cost, const PolicyFn& policy);

struct AverageCostSolution {
    double gain = 0.0;
    std::vector<double> bias;
    std::vector<SchedulingDecision> action;
    int iterations = 0;
    bool converged = false;
};

// Relative value iteration on the capped chain, with a self-loop
// aperiodicity transform; stops when the gain bracket is tighter than tol.
AverageCostSolution solve_average_cost(const StateSpace& space, const DecodeModel& model,
                                       const StageCost& cost, double tol = 1e-8,
                                       int max_iterations = 200000);

// Exact long-run average cost of a fixed policy on the capped chain.
double evaluate_average_policy(const StateSpace& space, const DecodeModel& model,
                               const StageCost& cost, const PolicyFn& policy, double tol = 1e-9,
                               int max_iterations = 500000);

}  // namespace relsched
