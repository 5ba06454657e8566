#include "relsched/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace relsched {

RelayRanking rank_relays(const SystemConfig& cfg) {
    RelayRanking ranking;
    ranking.order.assign(cfg.num_users, {});
    ranking.rank_of.assign(cfg.num_users, std::vector<int>(cfg.num_relays, 0));
    for (int i = 0; i < cfg.num_users; ++i) {
        std::vector<int> ids(cfg.num_relays);
        std::iota(ids.begin(), ids.end(), 0);
        // Worst link (largest eta) first; the top rank is the most reliable
        // relay.  Equal etas keep relay-id order.
        std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
            return cfg.eta_relay_user[a][i] > cfg.eta_relay_user[b][i];
        });
        ranking.order[i] = ids;
        for (int l = 1; l <= cfg.num_relays; ++l)
            ranking.rank_of[i][ids[l - 1]] = l;
    }
    return ranking;
}

DecodeModel::DecodeModel(SystemConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    ranking_ = rank_relays(cfg_);
}

void DecodeModel::check_retx(int i, int r) const {
    if (i < 0 || i >= cfg_.num_users) throw std::invalid_argument("DecodeModel: bad user");
    if (r < 0 || r > cfg_.retx_limits[i])
        throw std::invalid_argument("DecodeModel: retx count out of range");
}

double DecodeModel::user_failure_bs(int i, int r) const {
    check_retx(i, r);
    if (r == cfg_.retx_limits[i]) return 0.0;
    return cfg_.eta_bs_user[i] * std::pow(cfg_.decode_decay, r);
}

double DecodeModel::user_failure_relay(int i, int rank, int r) const {
    check_retx(i, r);
    if (rank < 1 || rank > cfg_.num_relays)
        throw std::invalid_argument("DecodeModel: relay rank out of range");
    if (r == cfg_.retx_limits[i]) return 0.0;
    int a = ranking_.relay_at(i, rank);
    return cfg_.eta_relay_user[a][i] * std::pow(cfg_.decode_decay, r);
}

double DecodeModel::relay_overhear_failure(int i, int target_rank, int tx_rank, int r) const {
    check_retx(i, r);
    if (target_rank < 1 || target_rank > cfg_.num_relays)
        throw std::invalid_argument("DecodeModel: relay rank out of range");
    if (tx_rank < 0 || tx_rank > cfg_.num_relays)
        throw std::invalid_argument("DecodeModel: transmitter rank out of range");
    if (target_rank == tx_rank)
        throw std::invalid_argument("DecodeModel: a relay does not receive its own transmission");
    if (r == cfg_.retx_limits[i]) return 0.0;
    // The receiving relay's feed quality is keyed by its base-station link;
    // no separate relay-to-relay parameters exist.
    int a = ranking_.relay_at(i, target_rank);
    return cfg_.eta_bs_relay[a] * std::pow(cfg_.decode_decay, r);
}

double DecodeModel::user_failure(int i, int transmitter, int r) const {
    if (transmitter == kBaseStation) return user_failure_bs(i, r);
    return user_failure_relay(i, ranking_.rank_of[i][transmitter], r);
}

SlotOutcome DecodeModel::sample_outcome(std::mt19937_64& rng, const SchedulingDecision& decision,
                                        const SystemState& state) const {
    SlotOutcome outcome;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    if (!decision.is_idle()) {
        int i = decision.user;
        int r = state.bs.hol_retx[i];
        double g = user_failure(i, decision.transmitter, r);
        outcome.user_decoded = unif(rng) >= g;
        if (!outcome.user_decoded) {
            int tx_rank = decision.transmitter == kBaseStation
                              ? 0
                              : ranking_.rank_of[i][decision.transmitter];
            for (int a = 0; a < cfg_.num_relays; ++a) {
                if (a == decision.transmitter || state.relays[a].decoded[i]) continue;
                double gr = relay_overhear_failure(i, ranking_.rank_of[i][a], tx_rank, r);
                if (unif(rng) >= gr) outcome.relay_decodes.push_back(a);
            }
        }
    }

    outcome.arrivals.resize(cfg_.num_users);
    for (int i = 0; i < cfg_.num_users; ++i) {
        if (cfg_.arrival_rates[i] > 0.0) {
            std::poisson_distribution<int> poisson(cfg_.arrival_rates[i]);
            outcome.arrivals[i] = poisson(rng);
        } else {
            outcome.arrivals[i] = 0;
        }
    }
    return outcome;
}

}  // namespace relsched
