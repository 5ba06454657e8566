#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relsched/config.hpp"
#include "relsched/policy.hpp"
#include "relsched/simulator.hpp"

namespace relsched {

// A sweep experiment: for each grid value, write it into every listed
// config field, then run each policy for R replications.
struct SweepSpec {
    std::vector<std::string> paths;  // e.g. "eta_relay_user[0][1]", "eta_bs_user[1]"
    std::vector<double> values;
};

struct ExperimentConfig {
    int schema_version = 1;
    SystemConfig system;
    SweepSpec sweep;
    std::vector<PolicyKind> policies;
    long long horizon = 1'000'000;
    int replications = 10;
    std::uint64_t seed = 1;
    std::optional<int> queue_cap;
    long long warmup_slots = 0;

    // Throws std::invalid_argument on schema violations (unknown policy,
    // empty sweep grid, unresolvable parameter path, bad system block).
    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
};

// Writes value into the config field the path names; throws on a path that
// does not resolve.  Supported roots: arrival_rates, eta_bs_user,
// eta_bs_relay, eta_relay_user, cost_rates, decode_decay.
void set_parameter(SystemConfig& cfg, const std::string& path, double value);

struct ExperimentRow {
    double grid_value = 0.0;
    PolicyKind policy = PolicyKind::RlpaIndex;
    int replication = 0;
    std::uint64_t seed = 0;
    SimMetrics metrics;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ExperimentRow> rows;  // grid-major, then policy, then replication

    // One CSV row per (grid point, policy, replication).
    std::string to_csv() const;
    // Per-(grid point, policy) means and 95% confidence intervals.
    std::string summary_json() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config, int jobs = 1);

}  // namespace relsched
