#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "relsched/config.hpp"

namespace relsched {

// Random-instance certification campaigns: the brute-force solvers provide
// the ground truth the index policies are checked against.
struct DrainingCampaign {
    int instances = 100;
    int max_users = 2;
    int max_relays = 2;
    int max_retx = 2;
    int max_initial_queue = 2;
    double gap_tolerance = 1e-8;
};

struct AverageCampaign {
    int instances = 25;
    int max_users = 2;
    int max_relays = 1;
    int max_retx = 2;
    int queue_cap = 6;
    long long horizon = 400'000;
    long long warmup_slots = 40'000;
    int replications = 10;
};

struct CertifyConfig {
    int schema_version = 1;
    std::optional<DrainingCampaign> draining;
    std::optional<AverageCampaign> average;
    std::uint64_t seed = 20240915;
    bool negative_control = true;

    static CertifyConfig from_json(const std::string& text);
    std::string to_json() const;
};

struct DrainingResult {
    int instance = 0;
    SystemConfig config;
    std::vector<int> initial_queues;
    std::string cost_shape;  // "linear" or "quadratic" holding cost
    double optimal_value = 0.0;
    double policy_value = 0.0;
    double gap = 0.0;
    bool passed = false;
};

struct AverageResult {
    int instance = 0;
    SystemConfig config;
    double optimal_gain = 0.0;
    double index_cost = 0.0;       // simulated RLPA_INDEX mean
    double index_ci95 = 0.0;
    double round_robin_cost = 0.0;
    double longest_queue_cost = 0.0;
    bool gain_matched = false;     // |index_cost - gain| <= ci95
    bool baselines_behind = false; // no baseline beats the index by > ci width
    bool passed = false;
};

struct CertifyReport {
    std::vector<DrainingResult> draining;
    std::vector<AverageResult> average;
    std::optional<DrainingResult> negative_control;  // deliberately wrong policy
    bool draining_passed = true;
    bool average_passed = true;

    bool all_passed() const { return draining_passed && average_passed; }
    std::string to_json() const;
};

// Deterministic random instance generators (seed fully determines the draw).
SystemConfig random_draining_config(std::mt19937_64& rng, const DrainingCampaign& campaign);
SystemConfig random_arrival_config(std::mt19937_64& rng, const AverageCampaign& campaign);

CertifyReport run_certification(const CertifyConfig& config, int jobs = 1);

}  // namespace relsched
