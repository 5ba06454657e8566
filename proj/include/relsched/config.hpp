#pragma once

#include <string>
#include <vector>

namespace relsched {

// Immutable problem instance: users, relays, arrival rates, holding-cost
// rates, retransmission limits and mean channel parameters.  All channel
// parameters are decode-failure scales in [0,1]; a smaller value means a
// more reliable link.
struct SystemConfig {
    int num_users = 0;
    int num_relays = 0;
    std::vector<double> arrival_rates;               // per-slot Poisson rate, per user
    std::vector<int> retx_limits;                    // r_i^max, per user
    std::vector<std::vector<double>> cost_rates;     // [user][retx], row length r_i^max + 1
    std::vector<double> eta_bs_user;                 // base station -> user
    std::vector<std::vector<double>> eta_relay_user; // [relay][user]
    std::vector<double> eta_bs_relay;                // base station -> relay
    double decode_decay = 0.9;                       // per-attempt failure decay

    // Throws std::invalid_argument on any shape or range violation,
    // including a cost row that decreases in the retransmission count.
    void validate() const;

    double total_arrival_rate() const;
    bool has_arrivals() const;
};

// Convenience builder for the common symmetric case used in tests.
SystemConfig make_config(int num_users, int num_relays, double arrival_rate,
                         int retx_limit, double eta_bs, double eta_relay,
                         double eta_bs_relay);

}  // namespace relsched
