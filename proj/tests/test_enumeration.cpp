#include <cmath>

#include "doctest.h"
#include "relnet/enumeration.hpp"
#include "relnet/errors.hpp"
#include "support/fixtures.hpp"

using namespace relnet;
using relnet::oracle::joint_enumerate;
using relnet::oracle::trail_oracle;

namespace {

BeliefNetwork pair() {
    return NetworkBuilder("pair")
        .node("a", {"a0", "a1"}, {}, {0.3, 0.7})
        .node("b", {"b0", "b1"}, {"a"}, {0.9, 0.1, 0.2, 0.8})
        .build();
}

}  // namespace

TEST_CASE("Bayes rule on two nodes") {
    const BeliefNetwork net = pair();
    const InferenceResult r = joint_enumerate(net, Query{{0}, {{1, 1}}});
    CHECK(r.posteriors.at(0)[0] == doctest::Approx(0.03 / 0.59).epsilon(1e-14));
    CHECK(r.posteriors.at(0)[1] == doctest::Approx(0.56 / 0.59).epsilon(1e-14));
    CHECK(std::exp(r.log_p_evidence) == doctest::Approx(0.59).epsilon(1e-14));
}

TEST_CASE("root prior and marginal of a child without evidence") {
    const BeliefNetwork net = pair();
    const InferenceResult r = joint_enumerate(net, Query{{0, 1}, {}});
    CHECK(r.posteriors.at(0)[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(r.posteriors.at(1)[0] == doctest::Approx(0.3 * 0.9 + 0.7 * 0.2));
    CHECK(r.log_p_evidence == doctest::Approx(0.0));
}

TEST_CASE("deterministic chain gives point masses") {
    const BeliefNetwork net = NetworkBuilder()
                                  .node("a", {"0", "1"}, {}, {0.0, 1.0})
                                  .node("b", {"0", "1"}, {"a"}, {1.0, 0.0, 0.0, 1.0})
                                  .node("c", {"0", "1", "2"}, {"b"}, {0.0, 0.0, 1.0, 1.0, 0.0, 0.0})
                                  .build();
    const InferenceResult r = joint_enumerate(net, Query{{0, 1, 2}, {}});
    CHECK(r.posteriors.at(1) == std::vector<double>{0.0, 1.0});
    CHECK(r.posteriors.at(2) == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("chain-rule probability of a full configuration") {
    const BeliefNetwork net = pair();
    CHECK(oracle::joint_probability(net, {1, 0}) == doctest::Approx(0.7 * 0.2));
    BeliefNetwork with = net;
    with.add_potential(Factor({1}, {2}, {0.5, 2.0}));
    CHECK(oracle::joint_probability(with, {1, 0}) == doctest::Approx(0.7 * 0.2 * 0.5));
}

TEST_CASE("posteriors normalize and Pr(evidence) lies in (0, 1]") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const BeliefNetwork net = fixtures::random_network(rng, 8, 3, 3, 0.45);
        const Query q = fixtures::random_query(net, rng, 3, 3);
        const InferenceResult r = joint_enumerate(net, q);
        CHECK(r.log_p_evidence <= 1e-12);
        CHECK(std::isfinite(r.log_p_evidence));
        for (const auto& [v, dist] : r.posteriors) {
            double s = 0.0;
            for (double x : dist) s += x;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("ceiling and impossible evidence") {
    const BeliefNetwork net = pair();
    CHECK_THROWS_AS(joint_enumerate(net, Query{{0}, {}}, {.max_states = 3}), StateSpaceTooLarge);
    const BeliefNetwork det = NetworkBuilder()
                                  .node("a", {"0", "1"}, {}, {1.0, 0.0})
                                  .node("b", {"0", "1"}, {"a"}, {1.0, 0.0, 0.0, 1.0})
                                  .build();
    CHECK_THROWS_AS(joint_enumerate(det, Query{{0}, {{1, 1}}}), ZeroProbabilityEvidence);
}

TEST_CASE("trail oracle on the Figure 1 structure") {
    const BeliefNetwork f1 = fixtures::figure1();
    // a and f are connected only through the collider g and the h side.
    CHECK(trail_oracle(f1, Query{{f1.at("f")}, {}}).contains(f1.at("a")));
    const auto sep = trail_oracle(f1, Query{{f1.at("g")}, fixtures::observe(f1, {{"d", 0}, {"f", 0}})});
    CHECK_FALSE(sep.contains(f1.at("a")));
    // Observing e blocks every trail from the top half to g.
    const auto blocked = trail_oracle(f1, Query{{f1.at("g")}, fixtures::observe(f1, {{"e", 0}})});
    CHECK(fixtures::names_of(f1, blocked) == std::set<std::string>{"a", "b", "c", "d", "h"});
}

TEST_CASE("collider at an evidence node opens, serial evidence node blocks") {
    std::mt19937_64 rng(2);
    // a -> c <- b
    const BeliefNetwork v = fixtures::with_parents({{}, {}, {0, 1}}, rng);
    CHECK(trail_oracle(v, Query{{0}, {}}) == std::set<NodeId>{1});
    CHECK(trail_oracle(v, Query{{0}, {{2, 0}}}).empty());
    // a -> b -> c
    const BeliefNetwork chain = fixtures::with_parents({{}, {0}, {1}}, rng);
    CHECK(trail_oracle(chain, Query{{0}, {}}).empty());
    CHECK(trail_oracle(chain, Query{{0}, {{1, 0}}}) == std::set<NodeId>{2});
    // a -> c <- b, c -> d: evidence below the collider opens it too.
    const BeliefNetwork below = fixtures::with_parents({{}, {}, {0, 1}, {2}}, rng);
    CHECK(trail_oracle(below, Query{{0}, {{3, 1}}}).empty());
}

TEST_CASE("polytree trails match the unique-path analysis") {
    // On a polytree each pair has one trail, so separation reduces to
    // checking the nodes on that trail directly.
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 6;
        std::vector<std::vector<NodeId>> parents(n);
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId j = 1; j < n; ++j) {
            const NodeId other = static_cast<NodeId>(rng() % j);
            edges.emplace_back(other, j);
        }
        for (auto [i, j] : edges) {
            if (rng() % 2) parents[j].push_back(i);
            else parents[i].push_back(j);
        }
        // Orientation may point forward in index; rebuild in a topological relabelling.
        std::vector<std::vector<NodeId>> kids(n);
        std::vector<std::size_t> indeg(n);
        for (NodeId v = 0; v < n; ++v) {
            indeg[v] = parents[v].size();
            for (NodeId p : parents[v]) kids[p].push_back(v);
        }
        std::vector<NodeId> order;
        for (NodeId v = 0; v < n; ++v)
            if (!indeg[v]) order.push_back(v);
        for (std::size_t i = 0; i < order.size(); ++i)
            for (NodeId c : kids[order[i]])
                if (!--indeg[c]) order.push_back(c);
        std::vector<NodeId> rank(n);
        for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<NodeId>(i);
        std::vector<std::vector<NodeId>> relabelled(n);
        for (NodeId v = 0; v < n; ++v)
            for (NodeId p : parents[v]) relabelled[rank[v]].push_back(rank[p]);
        const BeliefNetwork net = fixtures::with_parents(relabelled, rng);

        // Undirected adjacency and descendant sets for the hand check.
        std::vector<std::vector<NodeId>> adj(n);
        for (NodeId v = 0; v < n; ++v)
            for (NodeId p : net.node(v).parents) {
                adj[v].push_back(p);
                adj[p].push_back(v);
            }
        const NodeId t = static_cast<NodeId>(rng() % n);
        Assignment ev;
        for (NodeId v = 0; v < n; ++v)
            if (v != t && rng() % 4 == 0) ev[v] = 0;
        std::vector<bool> hot(n, false);
        for (NodeId v = 0; v < n; ++v) {
            const auto d = descendants(net, {v});
            for (NodeId w = 0; w < n; ++w)
                if (d[w] && ev.contains(w)) hot[v] = true;
        }
        std::set<NodeId> expected;
        for (NodeId s = 0; s < n; ++s) {
            if (s == t || ev.contains(s)) continue;
            // Unique path s .. t by BFS parents.
            std::vector<NodeId> prev(n, kInvalidNode);
            std::vector<NodeId> queue{s};
            prev[s] = s;
            for (std::size_t i = 0; i < queue.size(); ++i)
                for (NodeId w : adj[queue[i]])
                    if (prev[w] == kInvalidNode) {
                        prev[w] = queue[i];
                        queue.push_back(w);
                    }
            std::vector<NodeId> path{t};
            while (path.back() != s) path.push_back(prev[path.back()]);
            bool active = true;
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                const NodeId m = path[i];
                const auto& mp = net.node(m).parents;
                const bool collider = std::count(mp.begin(), mp.end(), path[i - 1]) &&
                                      std::count(mp.begin(), mp.end(), path[i + 1]);
                if (collider ? !hot[m] : ev.contains(m)) active = false;
            }
            if (!active) expected.insert(s);
        }
        CHECK(trail_oracle(net, Query{{t}, ev}) == expected);
    }
}

TEST_CASE("evidential trail nodes") {
    const BeliefNetwork f3 = fixtures::figure3();
    const auto on = oracle::evidential_trail_nodes(f3, Query{{f3.at("e")}, fixtures::observe(f3, {{"d", 0}})});
    CHECK(fixtures::names_of(f3, on) == std::set<std::string>{"c", "d", "e"});
}

TEST_CASE("trail oracles refuse large networks") {
    std::mt19937_64 rng(3);
    const BeliefNetwork big = fixtures::random_network(rng, 11, 2, 2, 0.3);
    CHECK_THROWS_AS(trail_oracle(big, Query{{0}, {}}), StateSpaceTooLarge);
}
