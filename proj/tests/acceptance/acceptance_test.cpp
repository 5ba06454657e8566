// Acceptance suite: one criterion per invocation (--criterion N), one
// PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "relsched/certify.hpp"
#include "relsched/experiment.hpp"
#include "relsched/klimov.hpp"
#include "relsched/simulator.hpp"

using namespace relsched;
namespace fs = std::filesystem;

#ifndef RELSCHED_PRESET_DIR
#error "RELSCHED_PRESET_DIR must be defined"
#endif
#ifndef RELSCHED_CLI_PATH
#error "RELSCHED_CLI_PATH must be defined"
#endif

namespace {

int jobs() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 4 : static_cast<int>(n);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct PointStats {
    double avg_cost = 0.0;
    double throughput = 0.0;
    int n = 0;
};

// Per-(grid value, policy) means in the order the grid was specified.
std::map<std::pair<double, PolicyKind>, PointStats> summarize(const ExperimentResult& result) {
    std::map<std::pair<double, PolicyKind>, PointStats> points;
    for (const auto& row : result.rows) {
        PointStats& p = points[{row.grid_value, row.policy}];
        p.avg_cost += row.metrics.avg_cost;
        p.throughput += row.metrics.throughput;
        ++p.n;
    }
    for (auto& [key, p] : points) {
        p.avg_cost /= p.n;
        p.throughput /= p.n;
    }
    return points;
}

SystemConfig random_instance(std::mt19937_64& rng) {
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto uni_int = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    SystemConfig cfg;
    cfg.num_users = uni_int(1, 3);
    cfg.num_relays = uni_int(0, 3);
    for (int i = 0; i < cfg.num_users; ++i) {
        cfg.arrival_rates.push_back(uni(0.05, 0.3));
        cfg.retx_limits.push_back(uni_int(0, 3));
        std::vector<double> row;
        double c = uni(0.5, 1.5);
        for (int r = 0; r <= cfg.retx_limits.back(); ++r) {
            row.push_back(c);
            c += uni(0.0, 0.5);
        }
        cfg.cost_rates.push_back(row);
        cfg.eta_bs_user.push_back(uni(0.3, 0.95));
    }
    for (int a = 0; a < cfg.num_relays; ++a) {
        std::vector<double> row;
        for (int i = 0; i < cfg.num_users; ++i) row.push_back(uni(0.05, cfg.eta_bs_user[i]));
        cfg.eta_relay_user.push_back(row);
        cfg.eta_bs_relay.push_back(uni(0.05, 0.9));
    }
    cfg.validate();
    return cfg;
}

bool verdict(int criterion, bool passed, const std::string& detail) {
    std::printf("CRITERION %d: %s — %s\n", criterion, passed ? "PASS" : "FAIL", detail.c_str());
    return passed;
}

// Criterion 1: on 100 random no-arrival instances the draining index policy
// matches the exact dynamic program within 1e-8 total cost, and a
// deliberately wrong policy is detected by the same harness.
bool criterion1() {
    CertifyConfig config;
    config.draining = DrainingCampaign{};  // 100 instances, gap tolerance 1e-8
    config.average.reset();
    config.seed = 20240915;
    config.negative_control = true;

    CertifyReport report = run_certification(config, jobs());
    double worst_gap = 0.0;
    int failed = 0;
    for (const auto& r : report.draining) {
        worst_gap = std::max(worst_gap, std::abs(r.gap));
        if (!r.passed) ++failed;
    }
    bool control_ok = report.negative_control && report.negative_control->gap > 1e-6;

    std::ostringstream detail;
    detail << report.draining.size() << " instances, " << failed
           << " failed, worst |gap| " << worst_gap << " (tolerance 1e-8), negative control gap "
           << (report.negative_control ? report.negative_control->gap : 0.0);
    return verdict(1, report.draining_passed && failed == 0 && control_ok, detail.str());
}

// Criterion 2: on 25 random arrival instances the simulated index policy
// reproduces the optimal long-run average cost within its 95% confidence
// interval, and neither baseline does better.
bool criterion2() {
    CertifyConfig config;
    config.draining.reset();
    config.average = AverageCampaign{};  // 25 instances
    config.seed = 20240915;
    config.negative_control = false;

    CertifyReport report = run_certification(config, jobs());
    int mismatched = 0, beaten = 0;
    for (const auto& r : report.average) {
        if (!r.gain_matched) ++mismatched;
        if (!r.baselines_behind) ++beaten;
    }
    std::ostringstream detail;
    detail << report.average.size() << " instances, " << mismatched
           << " outside the 95% CI of the optimal gain, " << beaten
           << " with a baseline ahead";
    return verdict(2, report.average_passed && mismatched == 0 && beaten == 0, detail.str());
}

// Criterion 3: sweeping the relay-to-user links from poor to strong in the
// two-user reference system, the average cost falls monotonically by
// 10-25% and the delivered throughput rises monotonically by 30-60%.
bool criterion3() {
    ExperimentConfig config =
        ExperimentConfig::from_json(read_file(fs::path(RELSCHED_PRESET_DIR) / "fig3.json"));
    ExperimentResult result = run_experiment(config, jobs());
    auto points = summarize(result);

    PolicyKind policy = config.policies.front();
    std::vector<double> costs, throughputs;
    for (double v : config.sweep.values) {
        costs.push_back(points.at({v, policy}).avg_cost);
        throughputs.push_back(points.at({v, policy}).throughput);
    }
    bool monotone = true;
    for (std::size_t k = 1; k < costs.size(); ++k)
        if (costs[k] > costs[k - 1] || throughputs[k] < throughputs[k - 1]) monotone = false;

    double cost_drop = (costs.front() - costs.back()) / costs.front();
    double thr_gain = (throughputs.back() - throughputs.front()) / throughputs.front();
    bool in_band = cost_drop >= 0.10 && cost_drop <= 0.25 && thr_gain >= 0.30 && thr_gain <= 0.60;

    std::ostringstream detail;
    detail << "cost " << costs.front() << " -> " << costs.back() << " (-"
           << 100.0 * cost_drop << "%, band 10-25%), throughput " << throughputs.front()
           << " -> " << throughputs.back() << " (+" << 100.0 * thr_gain
           << "%, band 30-60%), monotone=" << (monotone ? "yes" : "no");
    return verdict(3, monotone && in_band, detail.str());
}

// Criterion 4: as the direct link to one user degrades, the relay-aware
// index policy keeps a throughput lead over its no-relay variant at every
// grid point, and the no-relay variant degrades faster end to end.
bool criterion4() {
    ExperimentConfig config =
        ExperimentConfig::from_json(read_file(fs::path(RELSCHED_PRESET_DIR) / "fig4.json"));
    ExperimentResult result = run_experiment(config, jobs());
    auto points = summarize(result);

    bool dominated = true;
    std::vector<double> with_relay, without_relay;
    for (double v : config.sweep.values) {
        double a = points.at({v, PolicyKind::RlpaIndex}).throughput;
        double b = points.at({v, PolicyKind::NoRelayIndex}).throughput;
        with_relay.push_back(a);
        without_relay.push_back(b);
        if (a < b) dominated = false;
    }
    double drop_with = with_relay.front() - with_relay.back();
    double drop_without = without_relay.front() - without_relay.back();
    bool faster_degradation = drop_without > drop_with;

    std::ostringstream detail;
    detail << "relay throughput " << with_relay.front() << " -> " << with_relay.back()
           << " (drop " << drop_with << "), no-relay " << without_relay.front() << " -> "
           << without_relay.back() << " (drop " << drop_without
           << "), dominance=" << (dominated ? "every point" : "violated");
    return verdict(4, dominated && faster_degradation, detail.str());
}

// Criterion 5: the five structural properties behind the priority-index
// ordering hold, with numerical violations below 1e-12, on the reference
// instance and on 100 random instances.
bool criterion5() {
    int failed = 0;
    double worst = 0.0;
    auto check = [&](const SystemConfig& cfg) {
        DecodeModel model(cfg);
        KlimovInstance instance = build_rlpak(cfg, model);
        Lemma1Report report = verify_lemma1(instance, klimov_ordering(instance));
        for (double v : report.worst_violation) worst = std::max(worst, v);
        if (!report.all_passed()) ++failed;
    };

    SystemConfig reference;
    reference.num_users = 2;
    reference.num_relays = 1;
    reference.arrival_rates = {0.3, 0.3};
    reference.retx_limits = {2, 2};
    reference.cost_rates = {{0.98, 1.0, 1.02}, {1.25, 1.5, 1.75}};
    reference.eta_bs_user = {0.9, 0.9};
    reference.eta_relay_user = {{0.15, 0.15}};
    reference.eta_bs_relay = {0.3};
    check(reference);
    for (int k = 0; k < 100; ++k) {
        std::mt19937_64 rng(derive_seed(424242, k));
        check(random_instance(rng));
    }

    std::ostringstream detail;
    detail << "reference + 100 random instances, " << failed << " failed, worst violation "
           << worst << " (tolerance 1e-12)";
    return verdict(5, failed == 0 && worst < 1e-12, detail.str());
}

// Criterion 6: structural checks of the transformed instance — queue
// counts, row stochasticity within 1e-12, closed-form service times within
// 1e-9 of the recursion, index monotonicity in the retransmission count,
// and a Monte Carlo absorption-time cross-check within 3 standard errors.
bool criterion6() {
    std::ostringstream detail;
    bool ok = true;

    for (int k = 0; k < 50 && ok; ++k) {
        std::mt19937_64 rng(derive_seed(5150, k));
        SystemConfig cfg = random_instance(rng);
        DecodeModel model(cfg);
        KlimovInstance instance = build_rlpak(cfg, model);

        int expected = 0;
        for (int i = 0; i < cfg.num_users; ++i)
            expected += (cfg.num_relays + 1) * (cfg.retx_limits[i] + 1);
        if (instance.size() != expected) {
            detail << "queue count " << instance.size() << " != " << expected;
            ok = false;
            break;
        }

        for (int q = 0; q < instance.size(); ++q) {
            double row_sum = instance.departure_probs[q];
            for (const auto& [next, p] : instance.transition_probs[q]) row_sum += p;
            if (std::abs(row_sum - 1.0) > 1e-12) {
                detail << "row " << q << " mass " << row_sum;
                ok = false;
            }
        }

        std::vector<double> t = expected_service_time(instance);
        for (int q = 0; q < instance.size() && ok; ++q) {
            const KlimovLabel& label = instance.labels[q];
            double closed = family_service_time(model, label.user, label.relay_rank, label.retx);
            if (std::abs(t[q] - closed) > 1e-9) {
                detail << "service time mismatch at queue " << q << ": " << t[q] << " vs "
                       << closed;
                ok = false;
            }
        }

        PriorityOrdering ordering = klimov_ordering(instance);
        std::vector<int> position(instance.size());
        for (int q = 0; q < instance.size(); ++q) position[ordering.order[q]] = q;
        for (int q = 0; q < instance.size() && ok; ++q) {
            const KlimovLabel& label = instance.labels[q];
            int deeper = instance.index_of(
                {label.user, label.retx + 1, label.relay_rank, label.stratum});
            if (deeper >= 0 && position[deeper] > position[q]) {
                detail << "retx monotonicity violated at " << to_string(label);
                ok = false;
            }
        }
        for (std::size_t q = 1; q < ordering.index_values.size() && ok; ++q)
            if (ordering.index_values[q] > ordering.index_values[q - 1] + 1e-12) {
                detail << "index values not nonincreasing along the ordering";
                ok = false;
            }
    }

    // Monte Carlo absorption time on the reference single-user chain.
    if (ok) {
        SystemConfig cfg = make_config(1, 0, 0.1, 2, 0.9, 0.0, 0.0);
        DecodeModel model(cfg);
        KlimovInstance instance = build_rlpak(cfg, model);
        double expected = expected_service_time(instance)[instance.index_of({0, 0, 0, 0})];
        std::mt19937_64 rng(606);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const int draws = 400'000;
        double total = 0.0, total_sq = 0.0;
        for (int k = 0; k < draws; ++k) {
            int q = instance.index_of({0, 0, 0, 0});
            int slots = 0;
            while (q >= 0) {
                ++slots;
                double u = uni(rng);
                int next = -1;
                for (const auto& [to, p] : instance.service_probs[q]) {
                    if (u < p) {
                        next = to;
                        break;
                    }
                    u -= p;
                }
                q = next;
            }
            total += slots;
            total_sq += double(slots) * slots;
        }
        double mean = total / draws;
        double se = std::sqrt((total_sq / draws - mean * mean) / draws);
        if (std::abs(mean - expected) > 3.0 * se) {
            detail << "absorption time " << mean << " vs " << expected << " (3 s.e. " << 3 * se
                   << ")";
            ok = false;
        } else {
            detail << "50 random instances + absorption cross-check: service time " << expected
                   << ", sampled " << mean << " ± " << se;
        }
    }
    return verdict(6, ok, detail.str());
}

// Criterion 7: the command-line tool is bitwise reproducible — two runs on
// the same config and seed produce identical CSV and summary files.
bool criterion7() {
    fs::path work = fs::temp_directory_path() / "relsched-acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    fs::path config_path = work / "config.json";
    std::ofstream(config_path) << R"({
      "schema_version": 1,
      "system": {
        "num_users": 2,
        "num_relays": 1,
        "arrival_rates": [0.25, 0.25],
        "retx_limits": [2, 2],
        "cost_rates": [[0.98, 1.0, 1.02], [1.25, 1.5, 1.75]],
        "eta_bs_user": [0.9, 0.9],
        "eta_relay_user": [[0.3, 0.3]],
        "eta_bs_relay": [0.3]
      },
      "sweep": {"paths": ["eta_relay_user[0][0]", "eta_relay_user[0][1]"],
                "values": [0.6, 0.3]},
      "policies": ["RLPA_INDEX", "ROUND_ROBIN"],
      "horizon": 50000,
      "replications": 3,
      "seed": 7,
      "queue_cap": 12
    })";

    auto invoke = [&](const fs::path& out) {
        std::string cmd = std::string("\"") + RELSCHED_CLI_PATH + "\" simulate \"" +
                          config_path.string() + "\" --out \"" + out.string() +
                          "\" --jobs " + std::to_string(jobs()) + " > /dev/null";
        return std::system(cmd.c_str());
    };
    int rc1 = invoke(work / "run1");
    int rc2 = invoke(work / "run2");
    if (rc1 != 0 || rc2 != 0)
        return verdict(7, false,
                       "tool exited with " + std::to_string(rc1) + " / " + std::to_string(rc2));

    bool same_csv = read_file(work / "run1/sweep.csv") == read_file(work / "run2/sweep.csv");
    bool same_summary =
        read_file(work / "run1/summary.json") == read_file(work / "run2/summary.json");
    std::ostringstream detail;
    detail << "sweep.csv " << (same_csv ? "identical" : "DIFFERS") << ", summary.json "
           << (same_summary ? "identical" : "DIFFERS");
    return verdict(7, same_csv && same_summary, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    int criterion = 0;  // 0 = all
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) criterion = std::atoi(argv[++i]);
    }

    bool (*checks[])() = {criterion1, criterion2, criterion3, criterion4,
                          criterion5, criterion6, criterion7};
    bool all = true;
    try {
        if (criterion >= 1 && criterion <= 7) {
            all = checks[criterion - 1]();
        } else {
            for (auto* check : checks) all = check() && all;
        }
    } catch (const std::exception& e) {
        std::cerr << "acceptance run aborted: " << e.what() << '\n';
        return 2;
    }
    return all ? 0 : 1;
}
