#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relsched/channel.hpp"
#include "relsched/config.hpp"
#include "relsched/policy.hpp"

namespace relsched {

// One reproducible simulation run: the seed fully determines the trajectory.
struct SimRun {
    SystemConfig config;
    PolicyKind policy = PolicyKind::RlpaIndex;
    long long horizon = 1'000'000;
    std::uint64_t seed = 1;
    std::optional<int> queue_cap;       // arrivals beyond the cap are dropped
    std::vector<int> initial_backlog;   // empty = start from empty queues
    std::vector<QueueCostFn> cost_fns;  // draining cost; empty = linear cost
    long long warmup_slots = 0;         // slots excluded from cost/throughput
};

struct SimMetrics {
    long long slots = 0;  // counted slots (horizon - warmup, or drain time)
    double cumulative_cost = 0.0;
    double avg_cost = 0.0;
    long long decoded = 0;
    double throughput = 0.0;
    long long dropped_retx = 0;
    long long dropped_cap = 0;
    long long arrivals = 0;
    std::vector<long long> decoded_per_user;
    std::vector<long long> dropped_per_user;
    std::vector<long long> arrivals_per_user;
    std::vector<long long> final_backlog;
    std::optional<long long> drain_slot;  // draining runs that emptied early
};

SimMetrics run(const SimRun& spec);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double ci95 = 0.0;  // normal-approximation half width
};

struct ReplicatedMetrics {
    int replications = 0;
    MetricSummary avg_cost;
    MetricSummary throughput;
    std::vector<SimMetrics> runs;
};

// Independent replications with seeds derived from (spec.seed, replication).
ReplicatedMetrics run_many(const SimRun& spec, int replications);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace relsched
