#pragma once

// Shared test networks and helpers. CPT values in the figure fixtures are
// arbitrary valid tables drawn from a seed; only structure is prescribed.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "relnet/netgen.hpp"
#include "relnet/network.hpp"

namespace fixtures {

using relnet::Assignment;
using relnet::BeliefNetwork;
using relnet::NodeId;
using relnet::Posteriors;
using relnet::Query;

using Arc = std::pair<std::string, std::string>;

inline std::vector<double> random_rows(std::mt19937_64& rng, std::size_t rows, std::size_t k) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> out;
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> row(k);
        double total = 0.0;
        for (double& x : row) total += (x = e(rng));
        for (double x : row) out.push_back(x / total);
    }
    return out;
}

/// Nodes in the listed order, parents taken from `arcs` in arc order.
inline BeliefNetwork from_arcs(const std::vector<std::string>& names, const std::vector<Arc>& arcs,
                               std::uint64_t seed, std::vector<std::size_t> cards = {}) {
    std::mt19937_64 rng(seed);
    if (cards.empty()) cards.assign(names.size(), 2);
    relnet::NetworkBuilder b("fixture");
    auto card_of = [&](const std::string& n) {
        return cards[static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin())];
    };
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::vector<std::string> parents;
        std::size_t rows = 1;
        for (const auto& [from, to] : arcs) {
            if (to == names[i]) {
                parents.push_back(from);
                rows *= card_of(from);
            }
        }
        std::vector<std::string> states;
        for (std::size_t s = 0; s < cards[i]; ++s) states.push_back(names[i] + std::to_string(s));
        b.node(names[i], states, parents, random_rows(rng, rows, cards[i]));
    }
    return b.build();
}

inline BeliefNetwork figure1(std::uint64_t seed = 11) {
    return from_arcs({"a", "b", "c", "d", "e", "f", "g", "h"},
                     {{"a", "c"}, {"c", "d"}, {"c", "e"}, {"b", "e"}, {"d", "h"}, {"e", "h"}, {"e", "g"}, {"f", "g"}},
                     seed);
}

inline BeliefNetwork figure3(std::uint64_t seed = 13) {
    return from_arcs({"a", "b", "c", "d", "e", "f"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"c", "e"}, {"f", "e"}},
                     seed);
}

inline BeliefNetwork figure5(std::uint64_t seed = 17) {
    return from_arcs({"a", "b", "c", "d", "e", "f", "g", "h"},
                     {{"a", "c"}, {"c", "d"}, {"d", "e"}, {"e", "g"}, {"f", "g"}, {"g", "h"}, {"b", "h"}}, seed);
}

inline std::set<NodeId> ids(const BeliefNetwork& net, std::initializer_list<const char*> names) {
    std::set<NodeId> out;
    for (const char* n : names) out.insert(net.at(n));
    return out;
}

inline std::set<std::string> names_of(const BeliefNetwork& net, const std::set<NodeId>& v) {
    std::set<std::string> out;
    for (NodeId id : v) out.insert(net.node(id).name);
    return out;
}

inline Assignment observe(const BeliefNetwork& net, std::initializer_list<std::pair<const char*, std::size_t>> obs) {
    Assignment out;
    for (const auto& [n, s] : obs) out[net.at(n)] = s;
    return out;
}

/// Largest absolute difference over the posteriors present in `expected`.
inline double max_diff(const Posteriors& expected, const Posteriors& actual) {
    double worst = 0.0;
    for (const auto& [v, dist] : expected) {
        auto it = actual.find(v);
        if (it == actual.end() || it->second.size() != dist.size()) return INFINITY;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            const double d = std::abs(dist[i] - it->second[i]);
            if (std::isnan(d)) return INFINITY;
            worst = std::max(worst, d);
        }
    }
    return worst;
}

/// Random query whose evidence comes from one forward sample (so Pr > 0).
inline Query random_query(const BeliefNetwork& net, std::mt19937_64& rng, std::size_t max_evidence,
                          std::size_t max_targets) {
    std::vector<NodeId> all(net.size());
    for (NodeId v = 0; v < net.size(); ++v) all[v] = v;
    std::shuffle(all.begin(), all.end(), rng);
    const std::size_t ne = std::uniform_int_distribution<std::size_t>(0, std::min(max_evidence, net.size() - 1))(rng);
    const std::size_t nt =
        std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, std::min(max_targets, net.size() - ne)))(rng);
    const auto states = relnet::forward_sample(net, rng());
    Query q;
    for (std::size_t i = 0; i < ne; ++i) q.evidence[all[i]] = states[all[i]];
    for (std::size_t i = ne; i < ne + nt && i < all.size(); ++i) q.targets.insert(all[i]);
    return q;
}

/// Random network from a hand-rolled generator independent of netgen: arcs
/// i -> j (i < j) kept with probability `p`, at most `max_parents` per node.
inline BeliefNetwork random_network(std::mt19937_64& rng, std::size_t n, std::size_t max_parents,
                                    std::size_t max_states, double p) {
    std::bernoulli_distribution keep(p);
    std::uniform_int_distribution<std::size_t> card(2, max_states);
    BeliefNetwork net("random");
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<NodeId> parents;
        for (NodeId i = 0; i < j; ++i) {
            if (parents.size() < max_parents && keep(rng)) parents.push_back(i);
        }
        const std::size_t k = card(rng);
        std::size_t rows = 1;
        for (NodeId q : parents) rows *= net.cardinality(q);
        std::vector<std::string> states;
        for (std::size_t s = 0; s < k; ++s) states.push_back("v" + std::to_string(s));
        net.add_node("n" + std::to_string(j), states, parents, random_rows(rng, rows, k));
    }
    relnet::renormalize(net);
    return net;
}

/// Network with the given parent lists (ids must point backwards), random CPTs.
inline BeliefNetwork with_parents(const std::vector<std::vector<NodeId>>& parents, std::mt19937_64& rng,
                                  std::size_t max_states = 2) {
    std::uniform_int_distribution<std::size_t> card(2, max_states);
    BeliefNetwork net("structure");
    for (std::size_t j = 0; j < parents.size(); ++j) {
        const std::size_t k = max_states == 2 ? 2 : card(rng);
        std::size_t rows = 1;
        for (NodeId q : parents[j]) rows *= net.cardinality(q);
        std::vector<std::string> states;
        for (std::size_t s = 0; s < k; ++s) states.push_back("v" + std::to_string(s));
        net.add_node("n" + std::to_string(j), states, parents[j], random_rows(rng, rows, k));
    }
    relnet::renormalize(net);
    return net;
}

}  // namespace fixtures
