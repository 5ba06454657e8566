#include "relsched/policy.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace relsched {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::RlpaIndex: return "RLPA_INDEX";
        case PolicyKind::RdcIndex: return "RDC_INDEX";
        case PolicyKind::NoRelayIndex: return "NO_RELAY_INDEX";
        case PolicyKind::RoundRobin: return "ROUND_ROBIN";
        case PolicyKind::LongestQueue: return "LONGEST_QUEUE";
    }
    return "?";
}

std::optional<PolicyKind> policy_from_string(const std::string& name) {
    if (name == "RLPA_INDEX") return PolicyKind::RlpaIndex;
    if (name == "RDC_INDEX") return PolicyKind::RdcIndex;
    if (name == "NO_RELAY_INDEX") return PolicyKind::NoRelayIndex;
    if (name == "ROUND_ROBIN") return PolicyKind::RoundRobin;
    if (name == "LONGEST_QUEUE") return PolicyKind::LongestQueue;
    return std::nullopt;
}

Scheduler::Scheduler(PolicyKind kind, const DecodeModel& model,
                     const std::vector<int>& initial_queues,
                     const std::vector<QueueCostFn>& cost_fns)
    : kind_(kind), model_(&model) {
    const SystemConfig& cfg = model.config();
    family_time_.resize(cfg.num_users);
    family_index_.resize(cfg.num_users);
    for (int i = 0; i < cfg.num_users; ++i) {
        family_time_[i].resize(cfg.num_relays + 1);
        family_index_[i].resize(cfg.num_relays + 1);
        for (int l = 0; l <= cfg.num_relays; ++l) {
            family_time_[i][l].resize(cfg.retx_limits[i] + 1);
            family_index_[i][l].resize(cfg.retx_limits[i] + 1);
            for (int r = 0; r <= cfg.retx_limits[i]; ++r) {
                double t = family_service_time(model, i, l, r);
                family_time_[i][l][r] = t;
                family_index_[i][l][r] = cfg.cost_rates[i][r] / t;
            }
        }
    }

    if (kind_ == PolicyKind::RdcIndex) {
        if (cfg.has_arrivals())
            throw std::invalid_argument("Scheduler: draining index policy needs zero arrivals");
        auto instance = std::make_shared<KlimovInstance>(
            build_rdck(cfg, initial_queues, cost_fns, model));
        auto ordering = std::make_shared<PriorityOrdering>(klimov_ordering(*instance));
        rdck_rank_.assign(instance->size(), 0);
        for (int k = 0; k < instance->size(); ++k) rdck_rank_[ordering->order[k]] = k;
        rdck_ = std::move(instance);
        rdck_order_ = std::move(ordering);
    }
}

double Scheduler::service_time(int user, int rank, int retx) const {
    return family_time_[user][rank][retx];
}

const PriorityOrdering& Scheduler::rdc_ordering() const {
    if (!rdck_order_) throw std::logic_error("Scheduler: no draining ordering");
    return *rdck_order_;
}

const KlimovInstance& Scheduler::rdc_instance() const {
    if (!rdck_) throw std::logic_error("Scheduler: no draining instance");
    return *rdck_;
}

IndexedTransmitter Scheduler::rlpa_index(int user, int retx,
                                         const std::vector<RelayState>& relays) const {
    const SystemConfig& cfg = model_->config();
    IndexedTransmitter best{family_index_[user][0][retx], kBaseStation};
    for (int a = 0; a < cfg.num_relays; ++a) {
        if (!relays[a].decoded[user]) continue;
        int rank = model_->ranking().rank_of[user][a];
        double index = family_index_[user][rank][retx];
        if (index > best.index) best = {index, a};
    }
    return best;
}

SchedulingDecision Scheduler::decide_by_index(const SystemState& state, bool allow_relays) const {
    const SystemConfig& cfg = model_->config();
    SchedulingDecision decision;
    double best_index = 0.0;
    for (int i = 0; i < cfg.num_users; ++i) {
        if (state.bs.queue_lengths[i] == 0) continue;
        IndexedTransmitter cand =
            allow_relays ? rlpa_index(i, state.bs.hol_retx[i], state.relays)
                         : IndexedTransmitter{family_index_[i][0][state.bs.hol_retx[i]],
                                              kBaseStation};
        if (decision.is_idle() || cand.index > best_index) {
            decision = {i, cand.transmitter};
            best_index = cand.index;
        }
    }
    return decision;
}

SchedulingDecision Scheduler::decide_rdc(const SystemState& state) const {
    const SystemConfig& cfg = model_->config();
    SchedulingDecision decision;
    int best_rank = 0;
    for (int i = 0; i < cfg.num_users; ++i) {
        int x = state.bs.queue_lengths[i];
        if (x == 0) continue;
        int r = state.bs.hol_retx[i];
        // Candidate labels: the base station plus every decoded relay.
        SchedulingDecision user_best;
        int user_rank = 0;
        auto consider = [&](int rank, int transmitter) {
            int q = rdck_->index_of({i, r, rank, x});
            if (q < 0) throw std::logic_error("Scheduler: state outside the draining instance");
            if (user_best.is_idle() || rdck_rank_[q] < user_rank) {
                user_best = {i, transmitter};
                user_rank = rdck_rank_[q];
            }
        };
        consider(0, kBaseStation);
        for (int a = 0; a < cfg.num_relays; ++a)
            if (state.relays[a].decoded[i]) consider(model_->ranking().rank_of[i][a], a);
        if (decision.is_idle() || user_rank < best_rank) {
            decision = user_best;
            best_rank = user_rank;
        }
    }
    return decision;
}

SchedulingDecision Scheduler::decide(const SystemState& state, long long slot) const {
    const SystemConfig& cfg = model_->config();
    if (state.bs.all_empty()) return {};
    switch (kind_) {
        case PolicyKind::RlpaIndex:
            return decide_by_index(state, true);
        case PolicyKind::NoRelayIndex:
            return decide_by_index(state, false);
        case PolicyKind::RdcIndex:
            return decide_rdc(state);
        case PolicyKind::RoundRobin: {
            for (int step = 0; step < cfg.num_users; ++step) {
                int i = static_cast<int>((slot + step) % cfg.num_users);
                if (state.bs.queue_lengths[i] > 0)
                    return {i, rlpa_index(i, state.bs.hol_retx[i], state.relays).transmitter};
            }
            return {};
        }
        case PolicyKind::LongestQueue: {
            int best = -1;
            for (int i = 0; i < cfg.num_users; ++i)
                if (state.bs.queue_lengths[i] > 0 &&
                    (best < 0 || state.bs.queue_lengths[i] > state.bs.queue_lengths[best]))
                    best = i;
            return {best, rlpa_index(best, state.bs.hol_retx[best], state.relays).transmitter};
        }
    }
    return {};
}

std::vector<Scheduler::IndexRow> Scheduler::index_table() const {
    const SystemConfig& cfg = model_->config();
    std::vector<IndexRow> rows;
    for (int i = 0; i < cfg.num_users; ++i)
        for (int r = 0; r <= cfg.retx_limits[i]; ++r)
            for (int l = 0; l <= cfg.num_relays; ++l)
                rows.push_back({i, r, l, l == 0 ? kBaseStation : model_->ranking().relay_at(i, l),
                                family_time_[i][l][r], cfg.cost_rates[i][r],
                                family_index_[i][l][r]});
    return rows;
}

std::string Scheduler::index_table_csv(const std::vector<IndexRow>& rows) {
    std::ostringstream out;
    out << "user,retx,relay_rank,transmitter,T,cost_rate,index\n";
    for (const auto& row : rows) {
        out << row.user + 1 << ',' << row.retx << ',' << row.relay_rank << ','
            << (row.transmitter == kBaseStation ? std::string("BS")
                                                : std::to_string(row.transmitter + 1))
            << ',' << row.service_time << ',' << row.cost_rate << ',' << row.index << '\n';
    }
    return out.str();
}

}  // namespace relsched
