#include "relsched/state.hpp"

#include <stdexcept>

namespace relsched {

BaseStationState BaseStationState::empty(int num_users) {
    BaseStationState bs;
    bs.queue_lengths.assign(num_users, 0);
    bs.hol_retx.assign(num_users, 0);
    return bs;
}

bool BaseStationState::all_empty() const {
    for (int x : queue_lengths)
        if (x > 0) return false;
    return true;
}

RelayState RelayState::empty(int num_users) {
    RelayState r;
    r.decoded.assign(num_users, 0);
    return r;
}

SystemState SystemState::empty(const SystemConfig& cfg) {
    SystemState s;
    s.bs = BaseStationState::empty(cfg.num_users);
    s.relays.assign(cfg.num_relays, RelayState::empty(cfg.num_users));
    return s;
}

void check_state_invariants(const SystemState& state, const SystemConfig& cfg) {
    if (static_cast<int>(state.bs.queue_lengths.size()) != cfg.num_users ||
        static_cast<int>(state.bs.hol_retx.size()) != cfg.num_users ||
        static_cast<int>(state.relays.size()) != cfg.num_relays)
        throw std::invalid_argument("state shape mismatch");
    for (int i = 0; i < cfg.num_users; ++i) {
        int x = state.bs.queue_lengths[i];
        int r = state.bs.hol_retx[i];
        if (x < 0) throw std::invalid_argument("negative queue length");
        if (r < 0 || r > cfg.retx_limits[i])
            throw std::invalid_argument("hol_retx out of range");
        if (x == 0 && r != 0)
            throw std::invalid_argument("empty queue must have hol_retx 0");
        for (int a = 0; a < cfg.num_relays; ++a) {
            if (state.relays[a].decoded[i] && (x == 0 || r < 1))
                throw std::invalid_argument(
                    "relay flag set for a packet the base station never transmitted");
        }
    }
}

ApplyResult apply_outcome(const SystemState& state, const SchedulingDecision& decision,
                          const SlotOutcome& outcome, const SystemConfig& cfg) {
    if (static_cast<int>(outcome.arrivals.size()) != cfg.num_users)
        throw std::invalid_argument("apply_outcome: arrivals size mismatch");

    ApplyResult result;
    result.state = state;
    SystemState& next = result.state;

    if (decision.is_idle()) {
        if (!state.bs.all_empty())
            throw std::invalid_argument("apply_outcome: idle decision with backlog");
        if (outcome.user_decoded || !outcome.relay_decodes.empty())
            throw std::invalid_argument("apply_outcome: outcome without a transmission");
    } else {
        int i = decision.user;
        if (i < 0 || i >= cfg.num_users || state.bs.queue_lengths[i] == 0)
            throw std::invalid_argument("apply_outcome: invalid scheduled user");
        if (decision.transmitter != kBaseStation) {
            int a = decision.transmitter;
            if (a < 0 || a >= cfg.num_relays || !state.relays[a].decoded[i])
                throw std::invalid_argument(
                    "apply_outcome: transmitting relay never decoded this packet");
        }

        bool hol_departs = outcome.user_decoded;
        if (!outcome.user_decoded) {
            if (state.bs.hol_retx[i] == cfg.retx_limits[i]) {
                // r^max failure: the packet is discarded rather than retried.
                hol_departs = true;
                result.packet_discarded = true;
            } else {
                next.bs.hol_retx[i] = state.bs.hol_retx[i] + 1;
                for (int a : outcome.relay_decodes) {
                    if (a < 0 || a >= cfg.num_relays || a == decision.transmitter ||
                        state.relays[a].decoded[i])
                        throw std::invalid_argument("apply_outcome: inconsistent relay_decodes");
                    next.relays[a].decoded[i] = 1;
                }
            }
        }
        if (hol_departs) {
            next.bs.queue_lengths[i] = state.bs.queue_lengths[i] - 1;
            next.bs.hol_retx[i] = 0;
            for (auto& relay : next.relays) relay.decoded[i] = 0;
        }
    }

    for (int i = 0; i < cfg.num_users; ++i) {
        if (outcome.arrivals[i] < 0)
            throw std::invalid_argument("apply_outcome: negative arrivals");
        next.bs.queue_lengths[i] += outcome.arrivals[i];
    }
    return result;
}

double instantaneous_cost_linear(const BaseStationState& bs, const SystemConfig& cfg) {
    double cost = 0.0;
    for (int i = 0; i < cfg.num_users; ++i) {
        int x = bs.queue_lengths[i];
        if (x > 0)
            cost += cfg.cost_rates[i][0] * (x - 1) + cfg.cost_rates[i][bs.hol_retx[i]];
    }
    return cost;
}

double instantaneous_cost_convex(const BaseStationState& bs,
                                 const std::vector<QueueCostFn>& cost_fns) {
    if (cost_fns.size() != bs.queue_lengths.size())
        throw std::invalid_argument("instantaneous_cost_convex: cost_fns size mismatch");
    double cost = 0.0;
    for (std::size_t i = 0; i < cost_fns.size(); ++i)
        cost += cost_fns[i](bs.queue_lengths[i]);
    return cost;
}

void check_cost_fns(const std::vector<QueueCostFn>& cost_fns, int max_queue) {
    for (const auto& fn : cost_fns) {
        if (fn(0) != 0.0)
            throw std::invalid_argument("queue cost function must have U(0) = 0");
        for (int x = 1; x <= max_queue; ++x)
            if (fn(x) <= fn(x - 1))
                throw std::invalid_argument("queue cost function must be increasing");
    }
}

}  // namespace relsched
