#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "relsched/channel.hpp"
#include "relsched/config.hpp"
#include "relsched/state.hpp"

namespace relsched {

enum class KlimovKind { Rlpak, Rdck };

// Queue label (user, retx, relay rank), plus a queue-position stratum for
// draining instances.  relay_rank 0 means no relay holds the packet;
// otherwise the packet sits with relay d_{user, relay_rank} and no
// higher-ranked relay has decoded it.
struct KlimovLabel {
    int user = 0;
    int retx = 0;
    int relay_rank = 0;
    int stratum = 0;  // queue length while this packet is head-of-line; 0 for Rlpak

    friend bool operator==(const KlimovLabel&, const KlimovLabel&) = default;
};

std::string to_string(const KlimovLabel& label);

using SparseRows = std::vector<std::vector<std::pair<int, double>>>;

// Transformed multiclass queueing instance: labeled queues, feedback
// transition matrix, holding costs, unit service times.
//
// transition_probs carries the full feedback matrix, including the moves
// where an overhearing relay upgrades the packet's transmitter.
// service_probs is the matrix the service-time recursion runs on.  For
// Rlpak it keeps each label on its own transmitter family (a packet served
// from (i,r,l) is costed as if relay d_{i,l} keeps serving it), which
// reproduces the closed-form expected service times the priority indices
// are built from.  For Rdck the two matrices coincide: each stratum-x
// packet is an independent customer priced at the marginal holding cost
// U(x) - U(x-1), so a decode is a departure and transitions stay within
// the stratum.
struct KlimovInstance {
    KlimovKind kind = KlimovKind::Rlpak;
    std::vector<KlimovLabel> labels;
    SparseRows transition_probs;
    SparseRows service_probs;
    std::vector<double> holding_costs;
    std::vector<double> arrival_probs;   // Rlpak: lambda_i / lambda into (i,0,0)
    std::vector<double> departure_probs; // 1 - row sum of transition_probs
    std::unordered_map<long long, int> index_map;

    int index_of(const KlimovLabel& label) const;  // -1 when absent
    int size() const { return static_cast<int>(labels.size()); }

    std::string to_json() const;
};

// Priority order alpha_1 (highest) .. alpha_K with the index value each
// label was removed at.
struct PriorityOrdering {
    std::vector<int> order;           // positions into instance.labels
    std::vector<double> index_values; // aligned with order

    std::string to_json(const KlimovInstance& instance) const;
};

// Appendix-style transform of the arrivals problem: one queue per
// (user, retx, relay rank), K = sum_i (M+1)(r_i^max+1).
KlimovInstance build_rlpak(const SystemConfig& cfg, const DecodeModel& model);

// Draining transform: one queue per (user, retx, stratum, relay rank),
// K_i = (M+1) x_i(1) (r_i^max+1).  Requires all arrival rates zero.
KlimovInstance build_rdck(const SystemConfig& cfg, const std::vector<int>& initial_queues,
                          const std::vector<QueueCostFn>& cost_fns, const DecodeModel& model);

// Solves T_q = 1 + sum_{q' in A} p_{q,q'} T_{q'} over service_probs by
// backward substitution (transitions never lower the stratum or the retx
// count, so the system is triangular).  Entries outside A are NaN.
std::vector<double> expected_service_time(const KlimovInstance& instance,
                                          const std::vector<char>& subset);
std::vector<double> expected_service_time(const KlimovInstance& instance);  // A = all labels

// Closed-form per-family service time 1 + sum_q prod_s g(s) for a user's
// transmitter family (rank 0 = base station).
double family_service_time(const DecodeModel& model, int user, int rank, int retx);

// General index recursion: repeatedly remove the label with the smallest
// c/T^(A) ratio.  Ties prefer, as lower priority, the higher user id, then
// the lower retx count, the lower relay rank and the higher stratum.  For
// Rlpak the result is checked against the direct descending sort by
// c/T^(Omega).
PriorityOrdering klimov_ordering(const KlimovInstance& instance);

// Numerical check of the five structural properties the ordering proof
// relies on, evaluated on every prefix set A_k of the ordering.
struct Lemma1Report {
    // 1: prefix closure in (retx, rank); 2,3: T^(A_k) equals the
    // per-family closed form and T^(Omega); 4: service-time monotonicity;
    // 5: each alpha_k minimizes c/T^(Omega) over A_k.
    static constexpr double kTolerance = 1e-12;

    std::array<bool, 5> passed{};
    std::array<double, 5> worst_violation{};

    bool all_passed() const;
    std::string to_json() const;
};

Lemma1Report verify_lemma1(const KlimovInstance& instance, const PriorityOrdering& ordering);

}  // namespace relsched
