#include "relsched/certify.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "relsched/oracle.hpp"
#include "relsched/simulator.hpp"

namespace relsched {

using nlohmann::json;

namespace {

json config_to_json(const SystemConfig& cfg) {
    return json{{"num_users", cfg.num_users},
                {"num_relays", cfg.num_relays},
                {"arrival_rates", cfg.arrival_rates},
                {"retx_limits", cfg.retx_limits},
                {"cost_rates", cfg.cost_rates},
                {"eta_bs_user", cfg.eta_bs_user},
                {"eta_relay_user", cfg.eta_relay_user},
                {"eta_bs_relay", cfg.eta_bs_relay},
                {"decode_decay", cfg.decode_decay}};
}

json draining_to_json(const DrainingResult& r) {
    return json{{"instance", r.instance},
                {"config", config_to_json(r.config)},
                {"initial_queues", r.initial_queues},
                {"cost_shape", r.cost_shape},
                {"optimal_value", r.optimal_value},
                {"policy_value", r.policy_value},
                {"gap", r.gap},
                {"passed", r.passed}};
}

json average_to_json(const AverageResult& r) {
    return json{{"instance", r.instance},
                {"config", config_to_json(r.config)},
                {"optimal_gain", r.optimal_gain},
                {"index_cost", r.index_cost},
                {"index_ci95", r.index_ci95},
                {"round_robin_cost", r.round_robin_cost},
                {"longest_queue_cost", r.longest_queue_cost},
                {"gain_matched", r.gain_matched},
                {"baselines_behind", r.baselines_behind},
                {"passed", r.passed}};
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Convex holding costs the draining campaign alternates between.
std::vector<QueueCostFn> make_cost_fns(int num_users, bool quadratic) {
    std::vector<QueueCostFn> fns;
    for (int i = 0; i < num_users; ++i)
        fns.push_back(quadratic ? QueueCostFn([](int x) { return double(x) * x; })
                                : QueueCostFn([](int x) { return double(x); }));
    return fns;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (int i = next++; i < count; i = next++) body(i);
        });
    for (auto& worker : workers) worker.join();
}

}  // namespace

SystemConfig random_draining_config(std::mt19937_64& rng, const DrainingCampaign& campaign) {
    SystemConfig cfg;
    cfg.num_users = uniform_int(rng, 1, campaign.max_users);
    cfg.num_relays = uniform_int(rng, 0, campaign.max_relays);
    cfg.arrival_rates.assign(cfg.num_users, 0.0);
    for (int i = 0; i < cfg.num_users; ++i) {
        cfg.retx_limits.push_back(uniform_int(rng, 0, campaign.max_retx));
        std::vector<double> row;
        double c = uniform(rng, 0.5, 1.5);
        for (int r = 0; r <= cfg.retx_limits.back(); ++r) {
            row.push_back(c);
            c += uniform(rng, 0.0, 0.5);
        }
        cfg.cost_rates.push_back(row);
        cfg.eta_bs_user.push_back(uniform(rng, 0.3, 0.95));
    }
    for (int a = 0; a < cfg.num_relays; ++a) {
        // Relay links beat the base-station link for every user (the reason
        // a relay is deployed); the transform's label pricing relies on it.
        std::vector<double> row;
        for (int i = 0; i < cfg.num_users; ++i)
            row.push_back(uniform(rng, 0.05, cfg.eta_bs_user[i]));
        cfg.eta_relay_user.push_back(row);
        cfg.eta_bs_relay.push_back(uniform(rng, 0.05, 0.9));
    }
    cfg.validate();
    return cfg;
}

SystemConfig random_arrival_config(std::mt19937_64& rng, const AverageCampaign& campaign) {
    SystemConfig cfg;
    cfg.num_users = uniform_int(rng, 1, campaign.max_users);
    cfg.num_relays = uniform_int(rng, 0, campaign.max_relays);
    for (int i = 0; i < cfg.num_users; ++i) {
        cfg.arrival_rates.push_back(uniform(rng, 0.05, 0.4 / cfg.num_users));
        cfg.retx_limits.push_back(uniform_int(rng, 0, campaign.max_retx));
        std::vector<double> row;
        double c = uniform(rng, 0.5, 1.5);
        for (int r = 0; r <= cfg.retx_limits.back(); ++r) {
            row.push_back(c);
            c += uniform(rng, 0.0, 0.5);
        }
        cfg.cost_rates.push_back(row);
        cfg.eta_bs_user.push_back(uniform(rng, 0.3, 0.9));
    }
    for (int a = 0; a < cfg.num_relays; ++a) {
        std::vector<double> row;
        for (int i = 0; i < cfg.num_users; ++i)
            row.push_back(uniform(rng, 0.05, cfg.eta_bs_user[i]));
        cfg.eta_relay_user.push_back(row);
        cfg.eta_bs_relay.push_back(uniform(rng, 0.05, 0.8));
    }
    cfg.validate();
    return cfg;
}

namespace {

DrainingResult certify_draining_instance(const SystemConfig& cfg,
                                         const std::vector<int>& initial, bool quadratic,
                                         double tolerance, PolicyKind policy_kind) {
    DrainingResult result;
    result.config = cfg;
    result.initial_queues = initial;
    result.cost_shape = quadratic ? "quadratic" : "linear";

    std::vector<QueueCostFn> cost_fns = make_cost_fns(cfg.num_users, quadratic);
    StageCost cost = [&](const SystemState& s) {
        return instantaneous_cost_convex(s.bs, cost_fns);
    };

    DecodeModel model(cfg);
    StateSpace space = enumerate_states(cfg, initial);
    DrainingSolution optimal = solve_draining(space, model, cost);

    Scheduler scheduler(policy_kind, model, initial, cost_fns);
    std::vector<double> policy_value = evaluate_draining_policy(
        space, model, cost, [&](const SystemState& s) { return scheduler.decide(s); });

    SystemState start = SystemState::empty(cfg);
    start.bs.queue_lengths = initial;
    int id = space.id_of(start);
    if (id < 0) throw std::logic_error("certify: initial state missing from the space");

    result.optimal_value = optimal.value[id];
    result.policy_value = policy_value[id];
    result.gap = result.policy_value - result.optimal_value;
    result.passed = std::abs(result.gap) < tolerance;
    return result;
}

AverageResult certify_average_instance(const SystemConfig& cfg, const AverageCampaign& campaign,
                                       std::uint64_t seed) {
    AverageResult result;
    result.config = cfg;

    DecodeModel model(cfg);
    StateSpace space = enumerate_states(cfg, campaign.queue_cap);
    StageCost cost = [&](const SystemState& s) {
        return instantaneous_cost_linear(s.bs, cfg);
    };
    AverageCostSolution optimal = solve_average_cost(space, model, cost);
    if (!optimal.converged) throw std::runtime_error("certify: average-cost solver diverged");
    result.optimal_gain = optimal.gain;

    auto simulate = [&](PolicyKind kind) {
        SimRun run_spec;
        run_spec.config = cfg;
        run_spec.policy = kind;
        run_spec.horizon = campaign.horizon;
        run_spec.warmup_slots = campaign.warmup_slots;
        run_spec.queue_cap = campaign.queue_cap;
        run_spec.seed = derive_seed(seed, static_cast<std::uint64_t>(kind));
        return run_many(run_spec, campaign.replications);
    };

    ReplicatedMetrics index_metrics = simulate(PolicyKind::RlpaIndex);
    ReplicatedMetrics rr_metrics = simulate(PolicyKind::RoundRobin);
    ReplicatedMetrics lq_metrics = simulate(PolicyKind::LongestQueue);

    result.index_cost = index_metrics.avg_cost.mean;
    result.index_ci95 = index_metrics.avg_cost.ci95;
    result.round_robin_cost = rr_metrics.avg_cost.mean;
    result.longest_queue_cost = lq_metrics.avg_cost.mean;

    result.gain_matched =
        std::abs(result.index_cost - result.optimal_gain) <= result.index_ci95;
    double rr_margin = result.index_cost - rr_metrics.avg_cost.mean;
    double lq_margin = result.index_cost - lq_metrics.avg_cost.mean;
    result.baselines_behind = rr_margin <= result.index_ci95 + rr_metrics.avg_cost.ci95 &&
                              lq_margin <= result.index_ci95 + lq_metrics.avg_cost.ci95;
    result.passed = result.gain_matched && result.baselines_behind;
    return result;
}

}  // namespace

CertifyReport run_certification(const CertifyConfig& config, int jobs) {
    CertifyReport report;

    if (config.draining) {
        const DrainingCampaign& campaign = *config.draining;
        report.draining.resize(campaign.instances);
        parallel_for(campaign.instances, jobs, [&](int k) {
            std::mt19937_64 rng(derive_seed(config.seed, 1000 + k));
            SystemConfig cfg = random_draining_config(rng, campaign);
            std::vector<int> initial;
            bool nonempty = false;
            for (int i = 0; i < cfg.num_users; ++i) {
                initial.push_back(uniform_int(rng, 0, campaign.max_initial_queue));
                nonempty = nonempty || initial.back() > 0;
            }
            if (!nonempty) initial[0] = 1;
            bool quadratic = k % 2 == 1;
            report.draining[k] = certify_draining_instance(
                cfg, initial, quadratic, campaign.gap_tolerance, PolicyKind::RdcIndex);
            report.draining[k].instance = k;
        });
        for (const auto& r : report.draining) report.draining_passed &= r.passed;

        if (config.negative_control && campaign.instances > 0) {
            std::mt19937_64 rng(derive_seed(config.seed, 2));
            SystemConfig cfg;
            // Keep drawing until the greedy baseline is measurably suboptimal.
            for (int attempt = 0; attempt < 100; ++attempt) {
                cfg = random_draining_config(rng, campaign);
                if (cfg.num_users < 2) continue;
                std::vector<int> initial(cfg.num_users, campaign.max_initial_queue);
                DrainingResult r = certify_draining_instance(cfg, initial, true, 1e-8,
                                                             PolicyKind::LongestQueue);
                if (r.gap > 1e-6) {
                    r.instance = -1;
                    report.negative_control = r;
                    break;
                }
            }
        }
    }

    if (config.average) {
        const AverageCampaign& campaign = *config.average;
        report.average.resize(campaign.instances);
        parallel_for(campaign.instances, jobs, [&](int k) {
            std::mt19937_64 rng(derive_seed(config.seed, 5000 + k));
            SystemConfig cfg = random_arrival_config(rng, campaign);
            report.average[k] =
                certify_average_instance(cfg, campaign, derive_seed(config.seed, 6000 + k));
            report.average[k].instance = k;
        });
        for (const auto& r : report.average) report.average_passed &= r.passed;
    }

    return report;
}

CertifyConfig CertifyConfig::from_json(const std::string& text) {
    json doc = json::parse(text);
    CertifyConfig cfg;
    cfg.schema_version = doc.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
        throw std::invalid_argument("certify config: unsupported schema_version");
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.negative_control = doc.value("negative_control", cfg.negative_control);
    if (doc.contains("draining")) {
        const json& d = doc["draining"];
        DrainingCampaign c;
        c.instances = d.value("instances", c.instances);
        c.max_users = d.value("max_users", c.max_users);
        c.max_relays = d.value("max_relays", c.max_relays);
        c.max_retx = d.value("max_retx", c.max_retx);
        c.max_initial_queue = d.value("max_initial_queue", c.max_initial_queue);
        c.gap_tolerance = d.value("gap_tolerance", c.gap_tolerance);
        cfg.draining = c;
    }
    if (doc.contains("average")) {
        const json& a = doc["average"];
        AverageCampaign c;
        c.instances = a.value("instances", c.instances);
        c.max_users = a.value("max_users", c.max_users);
        c.max_relays = a.value("max_relays", c.max_relays);
        c.max_retx = a.value("max_retx", c.max_retx);
        c.queue_cap = a.value("queue_cap", c.queue_cap);
        c.horizon = a.value("horizon", c.horizon);
        c.warmup_slots = a.value("warmup_slots", c.warmup_slots);
        c.replications = a.value("replications", c.replications);
        cfg.average = c;
    }
    if (!cfg.draining && !cfg.average)
        throw std::invalid_argument("certify config: no campaign configured");
    return cfg;
}

std::string CertifyConfig::to_json() const {
    json doc;
    doc["schema_version"] = schema_version;
    doc["seed"] = seed;
    doc["negative_control"] = negative_control;
    if (draining)
        doc["draining"] = {{"instances", draining->instances},
                           {"max_users", draining->max_users},
                           {"max_relays", draining->max_relays},
                           {"max_retx", draining->max_retx},
                           {"max_initial_queue", draining->max_initial_queue},
                           {"gap_tolerance", draining->gap_tolerance}};
    if (average)
        doc["average"] = {{"instances", average->instances},
                          {"max_users", average->max_users},
                          {"max_relays", average->max_relays},
                          {"max_retx", average->max_retx},
                          {"queue_cap", average->queue_cap},
                          {"horizon", average->horizon},
                          {"warmup_slots", average->warmup_slots},
                          {"replications", average->replications}};
    return doc.dump(2);
}

std::string CertifyReport::to_json() const {
    json doc;
    doc["draining_passed"] = draining_passed;
    doc["average_passed"] = average_passed;
    doc["all_passed"] = all_passed();
    doc["draining"] = json::array();
    for (const auto& r : draining) doc["draining"].push_back(draining_to_json(r));
    doc["average"] = json::array();
    for (const auto& r : average) doc["average"].push_back(average_to_json(r));
    if (negative_control) doc["negative_control"] = draining_to_json(*negative_control);
    return doc.dump(2);
}

}  // namespace relsched
