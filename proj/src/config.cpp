#include "relsched/config.hpp"

#include <numeric>
#include <stdexcept>

namespace relsched {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument("SystemConfig: " + msg);
}

}  // namespace

void SystemConfig::validate() const {
    require(num_users >= 1, "need at least one user");
    require(num_relays >= 0, "negative relay count");
    require(static_cast<int>(arrival_rates.size()) == num_users, "arrival_rates size");
    require(static_cast<int>(retx_limits.size()) == num_users, "retx_limits size");
    require(static_cast<int>(cost_rates.size()) == num_users, "cost_rates rows");
    require(static_cast<int>(eta_bs_user.size()) == num_users, "eta_bs_user size");
    require(static_cast<int>(eta_relay_user.size()) == num_relays, "eta_relay_user rows");
    require(static_cast<int>(eta_bs_relay.size()) == num_relays, "eta_bs_relay size");
    require(decode_decay > 0.0 && decode_decay < 1.0, "decode_decay must lie in (0,1)");

    for (int i = 0; i < num_users; ++i) {
        require(arrival_rates[i] >= 0.0, "negative arrival rate");
        require(retx_limits[i] >= 0, "negative retransmission limit");
        require(static_cast<int>(cost_rates[i].size()) == retx_limits[i] + 1,
                "cost row length must be retx limit + 1");
        for (int r = 0; r <= retx_limits[i]; ++r) {
            require(cost_rates[i][r] >= 0.0, "negative cost rate");
            if (r > 0)
                require(cost_rates[i][r - 1] <= cost_rates[i][r],
                        "cost rates must be nondecreasing in the retx count");
        }
        require(eta_bs_user[i] >= 0.0 && eta_bs_user[i] <= 1.0, "eta_bs_user out of [0,1]");
    }
    for (int a = 0; a < num_relays; ++a) {
        require(static_cast<int>(eta_relay_user[a].size()) == num_users,
                "eta_relay_user row size");
        for (int i = 0; i < num_users; ++i)
            require(eta_relay_user[a][i] >= 0.0 && eta_relay_user[a][i] <= 1.0,
                    "eta_relay_user out of [0,1]");
        require(eta_bs_relay[a] >= 0.0 && eta_bs_relay[a] <= 1.0,
                "eta_bs_relay out of [0,1]");
    }
}

double SystemConfig::total_arrival_rate() const {
    return std::accumulate(arrival_rates.begin(), arrival_rates.end(), 0.0);
}

bool SystemConfig::has_arrivals() const {
    for (double rate : arrival_rates)
        if (rate > 0.0) return true;
    return false;
}

SystemConfig make_config(int num_users, int num_relays, double arrival_rate,
                         int retx_limit, double eta_bs, double eta_relay,
                         double eta_bs_relay) {
    SystemConfig cfg;
    cfg.num_users = num_users;
    cfg.num_relays = num_relays;
    cfg.arrival_rates.assign(num_users, arrival_rate);
    cfg.retx_limits.assign(num_users, retx_limit);
    cfg.cost_rates.assign(num_users, std::vector<double>(retx_limit + 1, 1.0));
    cfg.eta_bs_user.assign(num_users, eta_bs);
    cfg.eta_relay_user.assign(num_relays, std::vector<double>(num_users, eta_relay));
    cfg.eta_bs_relay.assign(num_relays, eta_bs_relay);
    cfg.validate();
    return cfg;
}

}  // namespace relsched
