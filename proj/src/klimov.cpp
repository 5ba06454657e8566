#include "relsched/klimov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace relsched {

namespace {

long long label_key(const KlimovLabel& label) {
    return ((static_cast<long long>(label.user) * 64 + label.retx) * 64 + label.relay_rank) *
               4096 +
           label.stratum;
}

// Tie break between equal index values: lower user id first, then the more
// nearly finished packet (higher retx, higher relay rank, lower stratum).
bool tie_prefers(const KlimovLabel& a, const KlimovLabel& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.retx != b.retx) return a.retx > b.retx;
    if (a.relay_rank != b.relay_rank) return a.relay_rank > b.relay_rank;
    return a.stratum < b.stratum;
}

void finalize_instance(KlimovInstance& instance) {
    instance.departure_probs.assign(instance.size(), 1.0);
    for (int q = 0; q < instance.size(); ++q) {
        double row_sum = 0.0;
        for (const auto& [next, p] : instance.transition_probs[q]) row_sum += p;
        instance.departure_probs[q] = 1.0 - row_sum;
    }
}

// Failure branches shared by both transforms: on a user-decode failure the
// packet keeps its relay rank unless a higher-ranked relay overhears it.
// index_of maps (retx, rank) to the row index within the same stratum.
std::vector<std::pair<int, double>> failure_branches(
    const DecodeModel& model, int user, int retx, int rank, double fail_prob,
    const std::function<int(int, int)>& index_of) {
    std::vector<std::pair<int, double>> branches;
    if (fail_prob <= 0.0) return branches;
    int num_relays = model.config().num_relays;

    std::vector<double> overhear_fail(num_relays + 1, 1.0);
    for (int m = rank + 1; m <= num_relays; ++m)
        overhear_fail[m] = model.relay_overhear_failure(user, m, rank, retx);
    std::vector<double> suffix(num_relays + 2, 1.0);  // product over ranks m..M
    for (int m = num_relays; m >= rank + 1; --m) suffix[m] = overhear_fail[m] * suffix[m + 1];

    branches.push_back({index_of(retx + 1, rank), fail_prob * suffix[rank + 1]});
    for (int n = rank + 1; n <= num_relays; ++n)
        branches.push_back(
            {index_of(retx + 1, n), fail_prob * (1.0 - overhear_fail[n]) * suffix[n + 1]});
    return branches;
}

nlohmann::json label_json(const KlimovLabel& label) {
    nlohmann::json j{{"user", label.user}, {"retx", label.retx}, {"relay_rank", label.relay_rank}};
    if (label.stratum > 0) j["stratum"] = label.stratum;
    return j;
}

}  // namespace

std::string to_string(const KlimovLabel& label) {
    std::string s = "(" + std::to_string(label.user + 1) + "," + std::to_string(label.retx);
    if (label.stratum > 0) s += "," + std::to_string(label.stratum);
    s += "," + std::to_string(label.relay_rank) + ")";
    return s;
}

int KlimovInstance::index_of(const KlimovLabel& label) const {
    auto it = index_map.find(label_key(label));
    return it == index_map.end() ? -1 : it->second;
}

std::string KlimovInstance::to_json() const {
    nlohmann::json j;
    j["kind"] = kind == KlimovKind::Rlpak ? "rlpak" : "rdck";
    j["labels"] = nlohmann::json::array();
    for (const auto& label : labels) j["labels"].push_back(label_json(label));
    j["holding_costs"] = holding_costs;
    j["arrival_probs"] = arrival_probs;
    j["departure_probs"] = departure_probs;
    j["transition_probs"] = nlohmann::json::array();
    for (const auto& row : transition_probs) {
        nlohmann::json jrow = nlohmann::json::array();
        for (const auto& [next, p] : row) jrow.push_back({{"to", next}, {"p", p}});
        j["transition_probs"].push_back(jrow);
    }
    return j.dump(2);
}

std::string PriorityOrdering::to_json(const KlimovInstance& instance) const {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t k = 0; k < order.size(); ++k) {
        nlohmann::json row = label_json(instance.labels[order[k]]);
        row["priority"] = k + 1;
        row["index"] = index_values[k];
        j.push_back(row);
    }
    return j.dump(2);
}

KlimovInstance build_rlpak(const SystemConfig& cfg, const DecodeModel& model) {
    cfg.validate();
    KlimovInstance instance;
    instance.kind = KlimovKind::Rlpak;

    for (int i = 0; i < cfg.num_users; ++i)
        for (int r = 0; r <= cfg.retx_limits[i]; ++r)
            for (int l = 0; l <= cfg.num_relays; ++l)
                instance.labels.push_back({i, r, l, 0});
    for (int q = 0; q < instance.size(); ++q)
        instance.index_map[label_key(instance.labels[q])] = q;

    const int K = instance.size();
    instance.transition_probs.assign(K, {});
    instance.service_probs.assign(K, {});
    instance.holding_costs.assign(K, 0.0);
    instance.arrival_probs.assign(K, 0.0);
    double lambda = cfg.total_arrival_rate();

    for (int q = 0; q < K; ++q) {
        const KlimovLabel& label = instance.labels[q];
        int i = label.user, r = label.retx, l = label.relay_rank;
        instance.holding_costs[q] = cfg.cost_rates[i][r];
        if (r == 0 && l == 0 && lambda > 0.0)
            instance.arrival_probs[q] = cfg.arrival_rates[i] / lambda;
        if (r == cfg.retx_limits[i]) continue;  // certain departure, empty row

        double fail = l == 0 ? model.user_failure_bs(i, r) : model.user_failure_relay(i, l, r);
        auto index_of = [&](int retx, int rank) { return instance.index_of({i, retx, rank, 0}); };
        instance.transition_probs[q] = failure_branches(model, i, r, l, fail, index_of);
        if (fail > 0.0) instance.service_probs[q] = {{index_of(r + 1, l), fail}};
    }
    finalize_instance(instance);
    return instance;
}

KlimovInstance build_rdck(const SystemConfig& cfg, const std::vector<int>& initial_queues,
                          const std::vector<QueueCostFn>& cost_fns, const DecodeModel& model) {
    cfg.validate();
    if (cfg.has_arrivals())
        throw std::invalid_argument("build_rdck: draining transform requires zero arrival rates");
    if (static_cast<int>(initial_queues.size()) != cfg.num_users ||
        static_cast<int>(cost_fns.size()) != cfg.num_users)
        throw std::invalid_argument("build_rdck: per-user argument size mismatch");
    int max_queue = *std::max_element(initial_queues.begin(), initial_queues.end());
    check_cost_fns(cost_fns, std::max(max_queue, 1));

    KlimovInstance instance;
    instance.kind = KlimovKind::Rdck;
    for (int i = 0; i < cfg.num_users; ++i)
        for (int x = initial_queues[i]; x >= 1; --x)
            for (int r = 0; r <= cfg.retx_limits[i]; ++r)
                for (int l = 0; l <= cfg.num_relays; ++l)
                    instance.labels.push_back({i, r, l, x});
    for (int q = 0; q < instance.size(); ++q)
        instance.index_map[label_key(instance.labels[q])] = q;

    const int K = instance.size();
    instance.transition_probs.assign(K, {});
    instance.holding_costs.assign(K, 0.0);
    instance.arrival_probs.assign(K, 0.0);

    for (int q = 0; q < K; ++q) {
        const KlimovLabel& label = instance.labels[q];
        int i = label.user, r = label.retx, l = label.relay_rank, x = label.stratum;
        // A stratum-x packet is its own customer: while it is in the system
        // the queue holds at least x packets, so it accounts for the
        // marginal cost U(x) - U(x-1) and the per-user costs sum to U(x).
        instance.holding_costs[q] = cost_fns[i](x) - cost_fns[i](x - 1);

        double fail = 0.0;
        if (r < cfg.retx_limits[i])
            fail = l == 0 ? model.user_failure_bs(i, r) : model.user_failure_relay(i, l, r);
        auto index_of = [&](int retx, int rank) { return instance.index_of({i, retx, rank, x}); };
        instance.transition_probs[q] = failure_branches(model, i, r, l, fail, index_of);
    }
    instance.service_probs = instance.transition_probs;
    finalize_instance(instance);
    return instance;
}

std::vector<double> expected_service_time(const KlimovInstance& instance,
                                          const std::vector<char>& subset) {
    const int K = instance.size();
    if (static_cast<int>(subset.size()) != K)
        throw std::invalid_argument("expected_service_time: subset size mismatch");
    // Transitions only raise the retx count or lower the stratum, so one
    // pass in (stratum ascending, retx descending) order solves the system.
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const KlimovLabel& la = instance.labels[a];
        const KlimovLabel& lb = instance.labels[b];
        if (la.stratum != lb.stratum) return la.stratum < lb.stratum;
        return la.retx > lb.retx;
    });
    std::vector<double> service_time(K, std::numeric_limits<double>::quiet_NaN());
    for (int q : order) {
        if (!subset[q]) continue;
        double t = 1.0;
        for (const auto& [next, p] : instance.service_probs[q])
            if (subset[next]) t += p * service_time[next];
        service_time[q] = t;
    }
    return service_time;
}

std::vector<double> expected_service_time(const KlimovInstance& instance) {
    return expected_service_time(instance, std::vector<char>(instance.size(), 1));
}

double family_service_time(const DecodeModel& model, int user, int rank, int retx) {
    int limit = model.config().retx_limits[user];
    double t = 1.0;
    for (int r = limit - 1; r >= retx; --r) {
        double g =
            rank == 0 ? model.user_failure_bs(user, r) : model.user_failure_relay(user, rank, r);
        t = 1.0 + g * t;
    }
    return t;
}

PriorityOrdering klimov_ordering(const KlimovInstance& instance) {
    const int K = instance.size();
    PriorityOrdering ordering;
    ordering.order.assign(K, -1);
    ordering.index_values.assign(K, 0.0);

    std::vector<char> active(K, 1);
    for (int k = K - 1; k >= 0; --k) {
        std::vector<double> service_time = expected_service_time(instance, active);
        int worst = -1;
        double worst_ratio = 0.0;
        for (int q = 0; q < K; ++q) {
            if (!active[q]) continue;
            double ratio = instance.holding_costs[q] / service_time[q];
            bool lower = worst < 0 || ratio < worst_ratio ||
                         (ratio == worst_ratio &&
                          tie_prefers(instance.labels[worst], instance.labels[q]));
            if (lower) {
                worst = q;
                worst_ratio = ratio;
            }
        }
        ordering.order[k] = worst;
        ordering.index_values[k] = worst_ratio;
        active[worst] = 0;
    }

    if (instance.kind == KlimovKind::Rlpak) {
        // The recursion must reproduce the direct descending sort by
        // c/T^(Omega) with the same tie break.
        std::vector<double> omega = expected_service_time(instance);
        std::vector<int> sorted(K);
        std::iota(sorted.begin(), sorted.end(), 0);
        std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
            double ra = instance.holding_costs[a] / omega[a];
            double rb = instance.holding_costs[b] / omega[b];
            if (ra != rb) return ra > rb;
            return tie_prefers(instance.labels[a], instance.labels[b]);
        });
        if (sorted != ordering.order)
            throw std::logic_error("klimov_ordering: recursion diverged from the ratio sort");
    }
    return ordering;
}

bool Lemma1Report::all_passed() const {
    return std::all_of(passed.begin(), passed.end(), [](bool b) { return b; });
}

std::string Lemma1Report::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (int item = 0; item < 5; ++item)
        j.push_back({{"item", item + 1},
                     {"passed", passed[item]},
                     {"worst_violation", worst_violation[item]}});
    return j.dump(2);
}

Lemma1Report verify_lemma1(const KlimovInstance& instance, const PriorityOrdering& ordering) {
    if (instance.kind != KlimovKind::Rlpak)
        throw std::invalid_argument("verify_lemma1: expects an arrivals-transform instance");
    const int K = instance.size();
    Lemma1Report report;
    report.passed.fill(true);
    report.worst_violation.fill(0.0);
    auto note = [&](int item, double violation) {
        report.worst_violation[item] = std::max(report.worst_violation[item], violation);
        if (violation >= Lemma1Report::kTolerance) report.passed[item] = false;
    };

    std::vector<double> omega = expected_service_time(instance);

    // Independent closed-form route: explicit sum of products of the
    // per-family failure probabilities.
    auto closed_form = [&](const KlimovLabel& label) {
        double t = 1.0;
        double prod = 1.0;
        int limit = 0;
        for (const auto& other : instance.labels)
            if (other.user == label.user) limit = std::max(limit, other.retx);
        for (int q = label.retx; q <= limit - 1; ++q) {
            const auto& row = instance.service_probs[instance.index_of(
                {label.user, q, label.relay_rank, label.stratum})];
            if (row.empty()) break;  // zero failure probability
            prod *= row.front().second;
            t += prod;
        }
        return t;
    };

    std::vector<char> in_set(K, 0);
    for (int k = 1; k <= K; ++k) {  // A_k grows from the highest priority down
        in_set[ordering.order[k - 1]] = 1;
        std::vector<double> t = expected_service_time(instance, in_set);

        for (int q = 0; q < K; ++q) {
            if (!in_set[q]) continue;
            const KlimovLabel& label = instance.labels[q];
            for (int q2 = 0; q2 < K; ++q2) {
                const KlimovLabel& other = instance.labels[q2];
                if (other.user != label.user) continue;
                if (other.retx > label.retx && other.relay_rank >= label.relay_rank) {
                    if (!in_set[q2])
                        note(0, 1.0);  // item 1: closure violated
                    else
                        note(3, std::max(0.0, t[q2] - t[q]));  // item 4
                }
            }
            // Items 2 and 3: T^(A_k) equals the closed form and T^(Omega).
            double violation =
                std::max(std::abs(t[q] - closed_form(label)), std::abs(t[q] - omega[q]));
            note(label.relay_rank == 0 ? 1 : 2, violation);
        }

        // Item 5: the label removed at step k attains the minimum ratio
        // over A_k.
        int alpha = ordering.order[k - 1];
        double alpha_ratio = instance.holding_costs[alpha] / omega[alpha];
        double min_ratio = alpha_ratio;
        for (int q = 0; q < K; ++q)
            if (in_set[q]) min_ratio = std::min(min_ratio, instance.holding_costs[q] / omega[q]);
        note(4, alpha_ratio - min_ratio);
    }
    return report;
}

}  // namespace relsched
