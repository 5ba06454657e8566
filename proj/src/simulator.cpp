#include "relsched/simulator.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace relsched {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    // splitmix64 step over the combined value
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SimMetrics run(const SimRun& spec) {
    const SystemConfig& cfg = spec.config;
    cfg.validate();
    if (spec.horizon < 1) throw std::invalid_argument("run: horizon must be positive");

    bool draining = !cfg.has_arrivals();
    if (spec.policy == PolicyKind::RdcIndex && !draining)
        throw std::invalid_argument("run: draining policy requires zero arrival rates");

    DecodeModel model(cfg);
    std::vector<int> backlog = spec.initial_backlog;
    if (backlog.empty()) backlog.assign(cfg.num_users, 0);
    if (static_cast<int>(backlog.size()) != cfg.num_users)
        throw std::invalid_argument("run: initial_backlog size mismatch");

    Scheduler scheduler(spec.policy, model, backlog, spec.cost_fns);

    SystemState state = SystemState::empty(cfg);
    state.bs.queue_lengths = backlog;

    SimMetrics metrics;
    metrics.decoded_per_user.assign(cfg.num_users, 0);
    metrics.dropped_per_user.assign(cfg.num_users, 0);
    metrics.arrivals_per_user.assign(cfg.num_users, 0);

    bool convex = !spec.cost_fns.empty();
    std::mt19937_64 rng(spec.seed);

    long long counted = 0;
    for (long long n = 0; n < spec.horizon; ++n) {
        if (draining && state.bs.all_empty()) {
            metrics.drain_slot = n;
            break;
        }
        bool counting = n >= spec.warmup_slots;
        if (counting) {
            ++counted;
            metrics.cumulative_cost += convex
                                           ? instantaneous_cost_convex(state.bs, spec.cost_fns)
                                           : instantaneous_cost_linear(state.bs, cfg);
        }

        SchedulingDecision decision = scheduler.decide(state, n);
        SlotOutcome outcome = model.sample_outcome(rng, decision, state);

        if (spec.queue_cap) {
            for (int i = 0; i < cfg.num_users; ++i) {
                int room = *spec.queue_cap - state.bs.queue_lengths[i];
                if (decision.user == i && outcome.user_decoded) ++room;
                if (outcome.arrivals[i] > room) {
                    int dropped = outcome.arrivals[i] - std::max(room, 0);
                    outcome.arrivals[i] -= dropped;
                    if (counting) metrics.dropped_cap += dropped;
                }
            }
        }
        if (counting) {
            for (int i = 0; i < cfg.num_users; ++i) {
                metrics.arrivals += outcome.arrivals[i];
                metrics.arrivals_per_user[i] += outcome.arrivals[i];
            }
        }

        ApplyResult applied = apply_outcome(state, decision, outcome, cfg);
        if (counting && outcome.user_decoded) {
            ++metrics.decoded;
            ++metrics.decoded_per_user[decision.user];
        }
        if (counting && applied.packet_discarded) {
            ++metrics.dropped_retx;
            ++metrics.dropped_per_user[decision.user];
        }
        state = std::move(applied.state);
    }

    metrics.slots = draining && metrics.drain_slot ? *metrics.drain_slot : counted;
    if (metrics.slots == 0) metrics.slots = counted > 0 ? counted : 1;
    metrics.avg_cost = metrics.cumulative_cost / static_cast<double>(metrics.slots);
    metrics.throughput = static_cast<double>(metrics.decoded) / static_cast<double>(metrics.slots);
    metrics.final_backlog.assign(state.bs.queue_lengths.begin(), state.bs.queue_lengths.end());
    return metrics;
}

namespace {

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    int n = static_cast<int>(values.size());
    if (n == 0) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (n - 1));
        s.ci95 = 1.96 * s.stddev / std::sqrt(static_cast<double>(n));
    }
    return s;
}

}  // namespace

ReplicatedMetrics run_many(const SimRun& spec, int replications) {
    if (replications < 1) throw std::invalid_argument("run_many: need at least one replication");
    ReplicatedMetrics result;
    result.replications = replications;
    std::vector<double> costs, throughputs;
    for (int rep = 0; rep < replications; ++rep) {
        SimRun one = spec;
        one.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(rep));
        result.runs.push_back(run(one));
        costs.push_back(result.runs.back().avg_cost);
        throughputs.push_back(result.runs.back().throughput);
    }
    result.avg_cost = summarize(costs);
    result.throughput = summarize(throughputs);
    return result;
}

}  // namespace relsched
