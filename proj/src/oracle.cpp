#include "relsched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace relsched {

namespace {

// Poisson pmf values 0..cap-1 with the tail mass lumped on cap.
std::vector<double> capped_poisson(double rate, int cap) {
    std::vector<double> pmf(cap + 1, 0.0);
    if (rate <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    double p = std::exp(-rate);
    double below = 0.0;
    for (int k = 0; k < cap; ++k) {
        pmf[k] = p;
        below += p;
        p *= rate / (k + 1);
    }
    pmf[cap] = 1.0 - below;
    return pmf;
}

}  // namespace

std::uint64_t encode_state(const SystemState& state, const SystemConfig& cfg) {
    std::uint64_t key = 0;
    for (int i = 0; i < cfg.num_users; ++i) {
        key = key * 64 + static_cast<std::uint64_t>(state.bs.queue_lengths[i]);
        key = key * 16 + static_cast<std::uint64_t>(state.bs.hol_retx[i]);
    }
    for (int a = 0; a < cfg.num_relays; ++a)
        for (int i = 0; i < cfg.num_users; ++i)
            key = key * 2 + (state.relays[a].decoded[i] ? 1 : 0);
    return key;
}

int StateSpace::id_of(const SystemState& state) const {
    auto it = index.find(encode_state(state, config));
    return it == index.end() ? -1 : it->second;
}

StateSpace enumerate_states(const SystemConfig& cfg, const std::vector<int>& queue_caps,
                            long long max_states) {
    cfg.validate();
    if (static_cast<int>(queue_caps.size()) != cfg.num_users)
        throw std::invalid_argument("enumerate_states: queue_caps size mismatch");
    for (int cap : queue_caps)
        if (cap < 0 || cap > 63) throw std::invalid_argument("enumerate_states: bad queue cap");

    StateSpace space;
    space.config = cfg;
    space.queue_caps = queue_caps;

    // Depth-first product over users, then over admissible flag columns.
    SystemState state = SystemState::empty(cfg);
    std::function<void(int)> fill_flags = [&](int column) {
        if (column == cfg.num_users) {
            if (space.size() >= max_states)
                throw std::runtime_error("enumerate_states: state cap exceeded");
            space.index[encode_state(state, cfg)] = space.size();
            space.states.push_back(state);
            return;
        }
        int combos = 1;
        bool flaggable =
            state.bs.queue_lengths[column] > 0 && state.bs.hol_retx[column] >= 1;
        if (flaggable) combos = 1 << cfg.num_relays;
        for (int mask = 0; mask < combos; ++mask) {
            for (int a = 0; a < cfg.num_relays; ++a)
                state.relays[a].decoded[column] = (mask >> a) & 1;
            fill_flags(column + 1);
        }
        for (int a = 0; a < cfg.num_relays; ++a) state.relays[a].decoded[column] = 0;
    };
    std::function<void(int)> fill_queues = [&](int user) {
        if (user == cfg.num_users) {
            fill_flags(0);
            return;
        }
        for (int x = 0; x <= queue_caps[user]; ++x) {
            state.bs.queue_lengths[user] = x;
            int max_r = x == 0 ? 0 : cfg.retx_limits[user];
            for (int r = 0; r <= max_r; ++r) {
                state.bs.hol_retx[user] = r;
                fill_queues(user + 1);
            }
        }
        state.bs.queue_lengths[user] = 0;
        state.bs.hol_retx[user] = 0;
    };
    fill_queues(0);
    return space;
}

StateSpace enumerate_states(const SystemConfig& cfg, int queue_cap, long long max_states) {
    return enumerate_states(cfg, std::vector<int>(cfg.num_users, queue_cap), max_states);
}

std::vector<SchedulingDecision> valid_decisions(const SystemState& state,
                                                const SystemConfig& cfg) {
    std::vector<SchedulingDecision> decisions;
    for (int i = 0; i < cfg.num_users; ++i) {
        if (state.bs.queue_lengths[i] == 0) continue;
        decisions.push_back({i, kBaseStation});
        for (int a = 0; a < cfg.num_relays; ++a)
            if (state.relays[a].decoded[i]) decisions.push_back({i, a});
    }
    if (decisions.empty()) decisions.push_back({});
    return decisions;
}

std::vector<std::pair<int, double>> transition_row(const StateSpace& space,
                                                   const DecodeModel& model, int state_id,
                                                   const SchedulingDecision& decision) {
    const SystemConfig& cfg = space.config;
    const SystemState& state = space.states[state_id];

    // Transmission outcome branches (before arrivals).
    struct Branch {
        SystemState state;
        double prob;
    };
    std::vector<Branch> branches;

    if (decision.is_idle()) {
        branches.push_back({state, 1.0});
    } else {
        int i = decision.user;
        int r = state.bs.hol_retx[i];
        double g = model.user_failure(i, decision.transmitter, r);

        if (g < 1.0) {
            SlotOutcome success{true, {}, std::vector<int>(cfg.num_users, 0)};
            branches.push_back({apply_outcome(state, decision, success, cfg).state, 1.0 - g});
        }
        if (g > 0.0) {
            std::vector<int> listeners;
            for (int a = 0; a < cfg.num_relays; ++a)
                if (a != decision.transmitter && !state.relays[a].decoded[i])
                    listeners.push_back(a);
            int tx_rank =
                decision.transmitter == kBaseStation
                    ? 0
                    : model.ranking().rank_of[i][decision.transmitter];
            for (int mask = 0; mask < (1 << listeners.size()); ++mask) {
                double prob = g;
                SlotOutcome fail{false, {}, std::vector<int>(cfg.num_users, 0)};
                for (std::size_t b = 0; b < listeners.size(); ++b) {
                    int a = listeners[b];
                    double ga = model.relay_overhear_failure(
                        i, model.ranking().rank_of[i][a], tx_rank, r);
                    if ((mask >> b) & 1) {
                        prob *= 1.0 - ga;
                        fail.relay_decodes.push_back(a);
                    } else {
                        prob *= ga;
                    }
                }
                if (prob > 0.0)
                    branches.push_back({apply_outcome(state, decision, fail, cfg).state, prob});
            }
        }
    }

    // Compose per-user capped arrivals.
    std::unordered_map<std::uint64_t, std::pair<SystemState, double>> acc;
    for (const auto& branch : branches) {
        std::vector<std::pair<SystemState, double>> current{{branch.state, branch.prob}};
        for (int i = 0; i < cfg.num_users; ++i) {
            if (cfg.arrival_rates[i] <= 0.0) continue;
            std::vector<std::pair<SystemState, double>> next;
            for (auto& [s, p] : current) {
                int room = space.queue_caps[i] - s.bs.queue_lengths[i];
                std::vector<double> pmf = capped_poisson(cfg.arrival_rates[i], room);
                for (int k = 0; k <= room; ++k) {
                    if (pmf[k] <= 0.0) continue;
                    SystemState sk = s;
                    sk.bs.queue_lengths[i] += k;
                    next.push_back({std::move(sk), p * pmf[k]});
                }
            }
            current = std::move(next);
        }
        for (auto& [s, p] : current) {
            std::uint64_t key = encode_state(s, cfg);
            auto it = acc.find(key);
            if (it == acc.end())
                acc.emplace(key, std::make_pair(s, p));
            else
                it->second.second += p;
        }
    }

    std::vector<std::pair<int, double>> row;
    row.reserve(acc.size());
    for (auto& [key, sp] : acc) {
        int id = space.id_of(sp.first);
        if (id < 0) throw std::logic_error("transition_row: successor outside the state space");
        row.push_back({id, sp.second});
    }
    std::sort(row.begin(), row.end());
    return row;
}

namespace {

// Successors never raise sum(x) (no arrivals) and raise sum(r) within a
// sum(x) level, so this order makes the draining chain triangular.
std::vector<int> draining_order(const StateSpace& space) {
    std::vector<int> order(space.size());
    std::iota(order.begin(), order.end(), 0);
    auto rank = [&](int id) {
        const SystemState& s = space.states[id];
        int sx = std::accumulate(s.bs.queue_lengths.begin(), s.bs.queue_lengths.end(), 0);
        int sr = std::accumulate(s.bs.hol_retx.begin(), s.bs.hol_retx.end(), 0);
        return std::make_pair(sx, -sr);
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return rank(a) < rank(b); });
    return order;
}

}  // namespace

DrainingSolution solve_draining(const StateSpace& space, const DecodeModel& model,
                                const StageCost& cost) {
    if (space.config.has_arrivals())
        throw std::invalid_argument("solve_draining: arrival rates must be zero");
    DrainingSolution solution;
    solution.value.assign(space.size(), 0.0);
    solution.action.assign(space.size(), {});

    for (int id : draining_order(space)) {
        const SystemState& state = space.states[id];
        if (state.bs.all_empty()) continue;  // absorbing, value 0
        double best = 0.0;
        SchedulingDecision best_decision;
        bool first = true;
        for (const auto& decision : valid_decisions(state, space.config)) {
            double v = 0.0;
            for (const auto& [next, p] : transition_row(space, model, id, decision))
                v += p * solution.value[next];
            if (first || v < best) {
                best = v;
                best_decision = decision;
                first = false;
            }
        }
        solution.value[id] = cost(state) + best;
        solution.action[id] = best_decision;
    }
    return solution;
}

std::vector<double> evaluate_draining_policy(const StateSpace& space, const DecodeModel& model,
                                             const StageCost& cost, const PolicyFn& policy) {
    if (space.config.has_arrivals())
        throw std::invalid_argument("evaluate_draining_policy: arrival rates must be zero");
    std::vector<double> value(space.size(), 0.0);
    for (int id : draining_order(space)) {
        const SystemState& state = space.states[id];
        if (state.bs.all_empty()) continue;
        double v = 0.0;
        for (const auto& [next, p] : transition_row(space, model, id, policy(state)))
            v += p * value[next];
        value[id] = cost(state) + v;
    }
    return value;
}

namespace {

struct Kernel {
    // rows[s] holds one row per valid decision of state s.
    std::vector<std::vector<SchedulingDecision>> decisions;
    std::vector<std::vector<std::vector<std::pair<int, double>>>> rows;
    std::vector<double> stage_cost;
};

Kernel build_kernel(const StateSpace& space, const DecodeModel& model, const StageCost& cost) {
    Kernel kernel;
    kernel.decisions.resize(space.size());
    kernel.rows.resize(space.size());
    kernel.stage_cost.resize(space.size());
    for (int id = 0; id < space.size(); ++id) {
        kernel.stage_cost[id] = cost(space.states[id]);
        kernel.decisions[id] = valid_decisions(space.states[id], space.config);
        for (const auto& decision : kernel.decisions[id])
            kernel.rows[id].push_back(transition_row(space, model, id, decision));
    }
    return kernel;
}

// Self-loop damping keeps the iteration aperiodic without changing the
// stationary distribution or the optimal policy.
constexpr double kDamping = 0.2;

}  // namespace

AverageCostSolution solve_average_cost(const StateSpace& space, const DecodeModel& model,
                                       const StageCost& cost, double tol, int max_iterations) {
    if (!space.config.has_arrivals())
        throw std::invalid_argument("solve_average_cost: use solve_draining for zero arrivals");
    Kernel kernel = build_kernel(space, model, cost);

    AverageCostSolution solution;
    solution.bias.assign(space.size(), 0.0);
    solution.action.assign(space.size(), {});
    std::vector<double> next(space.size(), 0.0);

    for (int iter = 0; iter < max_iterations; ++iter) {
        double min_delta = 0.0, max_delta = 0.0;
        for (int id = 0; id < space.size(); ++id) {
            double best = 0.0;
            int best_a = 0;
            for (std::size_t a = 0; a < kernel.rows[id].size(); ++a) {
                double v = 0.0;
                for (const auto& [to, p] : kernel.rows[id][a]) v += p * solution.bias[to];
                if (a == 0 || v < best) {
                    best = v;
                    best_a = static_cast<int>(a);
                }
            }
            double updated = kernel.stage_cost[id] + kDamping * solution.bias[id] +
                             (1.0 - kDamping) * best;
            next[id] = updated;
            solution.action[id] = kernel.decisions[id][best_a];
            double delta = updated - solution.bias[id];
            if (id == 0) {
                min_delta = max_delta = delta;
            } else {
                min_delta = std::min(min_delta, delta);
                max_delta = std::max(max_delta, delta);
            }
        }
        double offset = next[0];
        for (int id = 0; id < space.size(); ++id) solution.bias[id] = next[id] - offset;
        solution.iterations = iter + 1;
        if (max_delta - min_delta < tol) {
            solution.gain = 0.5 * (max_delta + min_delta);
            solution.converged = true;
            return solution;
        }
        solution.gain = 0.5 * (max_delta + min_delta);
    }
    return solution;
}

double evaluate_average_policy(const StateSpace& space, const DecodeModel& model,
                               const StageCost& cost, const PolicyFn& policy, double tol,
                               int max_iterations) {
    std::vector<std::vector<std::pair<int, double>>> rows(space.size());
    std::vector<double> stage(space.size());
    for (int id = 0; id < space.size(); ++id) {
        stage[id] = cost(space.states[id]);
        rows[id] = transition_row(space, model, id, policy(space.states[id]));
    }
    std::vector<double> h(space.size(), 0.0), next(space.size(), 0.0);
    double gain = 0.0;
    for (int iter = 0; iter < max_iterations; ++iter) {
        double min_delta = 0.0, max_delta = 0.0;
        for (int id = 0; id < space.size(); ++id) {
            double v = 0.0;
            for (const auto& [to, p] : rows[id]) v += p * h[to];
            next[id] = stage[id] + kDamping * h[id] + (1.0 - kDamping) * v;
            double delta = next[id] - h[id];
            if (id == 0) {
                min_delta = max_delta = delta;
            } else {
                min_delta = std::min(min_delta, delta);
                max_delta = std::max(max_delta, delta);
            }
        }
        double offset = next[0];
        for (int id = 0; id < space.size(); ++id) h[id] = next[id] - offset;
        gain = 0.5 * (max_delta + min_delta);
        if (max_delta - min_delta < tol) return gain;
    }
    return gain;
}

}  // namespace relsched
