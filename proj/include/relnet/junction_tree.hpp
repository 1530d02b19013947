#pragma once

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "relnet/network.hpp"

namespace relnet {

struct UndirectedGraph {
    std::vector<std::set<NodeId>> adj;

    explicit UndirectedGraph(std::size_t n = 0) : adj(n) {}
    std::size_t size() const noexcept { return adj.size(); }
    void add_edge(NodeId a, NodeId b);
    bool has_edge(NodeId a, NodeId b) const { return adj[a].contains(b); }
    std::size_t edge_count() const;
};

/// Skeleton plus an edge between every pair of co-parents. The scope of each
/// likelihood potential is also made complete.
UndirectedGraph moralize(const BeliefNetwork& network);

struct Triangulation {
    std::vector<std::pair<NodeId, NodeId>> fill_edges;  // (lower, higher)
    std::vector<NodeId> elimination_order;
    /// Maximal cliques of the filled graph, sorted, in elimination order.
    std::vector<std::vector<NodeId>> cliques;
};

/// Greedy min-fill elimination; ties go to the lowest node index.
Triangulation triangulate(const UndirectedGraph& graph);

struct Clique {
    std::vector<NodeId> vars;  // ascending
    Factor potential;
};

struct Sepset {
    std::size_t a = 0;
    std::size_t b = 0;
    std::vector<NodeId> vars;  // ascending, may be empty between components
    Factor potential;
};

struct JunctionTree {
    std::vector<Clique> cliques;
    std::vector<Sepset> sepsets;
    /// Per clique: (neighbour clique, sepset index).
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> neighbours;
    /// Potentials before any evidence or message passing.
    std::vector<Factor> initial;
    std::vector<std::size_t> cardinalities;
    bool calibrated = false;
    double log_p_evidence = 0.0;
};

/// Moralize, triangulate, keep maximal cliques, join them with a maximum-weight
/// spanning tree (weights are intersection sizes), and multiply each CPT and
/// potential into the first clique covering its scope.
JunctionTree build_junction_tree(const BeliefNetwork& network);

/// Greatest product of cardinalities over the cliques (0 for an empty tree).
std::size_t max_clique_states(const JunctionTree& jt);

inline constexpr std::size_t kDefaultRoot = static_cast<std::size_t>(-1);

/// Resets the potentials, enters the evidence by zeroing incompatible entries
/// of one clique per variable, and runs collect then distribute (Hugin
/// updates). Every message source is normalized and the logs of the constants
/// are summed, so `log_p_evidence` stays finite for tiny Pr(evidence).
/// Afterwards every clique and sepset holds a normalized marginal.
/// Throws ZeroProbabilityEvidence when Pr(evidence) = 0.
void propagate(JunctionTree& jt, const Assignment& evidence, std::size_t root = kDefaultRoot);

/// Marginal of `var` from the first calibrated clique containing it.
std::vector<double> clique_marginal(const JunctionTree& jt, NodeId var);

InferenceResult infer(const BeliefNetwork& network, const Query& query);

InferenceEngine junction_tree_engine();

}  // namespace relnet
