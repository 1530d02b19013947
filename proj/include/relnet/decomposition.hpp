#pragma once

#include <functional>
#include <set>
#include <vector>

#include "relnet/network.hpp"
#include "relnet/nuisance.hpp"

namespace relnet {

/// The pending node that comes last in `order`.
NodeId select_target(const std::set<NodeId>& pending, const std::vector<NodeId>& order);

/// Picks up to `batch` targets among the pending nodes.
using TargetSelector =
    std::function<std::vector<NodeId>(const std::set<NodeId>& pending, const std::vector<NodeId>& order, std::size_t batch)>;

/// Repeated select_target: bottom of the graph first.
TargetSelector last_in_order_selector();

/// Takes pending nodes in the given sequence, then falls back to last_in_order.
TargetSelector forced_order_selector(std::vector<NodeId> sequence);

struct DecompositionOptions {
    bool nuisance = false;
    std::size_t batch_size = 1;
    TargetSelector selector;  // empty selects last_in_order_selector()
    /// Subnetwork runs in flight at once; 1 runs everything on the caller's thread.
    unsigned threads = 1;
    AnchorCache* cache = nullptr;
};

struct DecompositionStep {
    std::size_t index = 0;
    std::set<NodeId> targets;
    /// Relevant nodes of this step: the reduced network plus the evidence and
    /// instantiated nodes it depends on.
    std::set<NodeId> subnetwork;
    /// Members of `subnetwork` that were still pending when the step began.
    std::set<NodeId> updated;
    Posteriors posteriors;
    std::size_t reduced_size = 0;
    std::size_t max_clique_states = 0;
    double millis = 0.0;
};

struct DecompositionResult {
    Posteriors posteriors;
    std::vector<DecompositionStep> steps;
    /// Evidence plus everything evidence propagation fixed up front.
    Assignment instantiated;
};

/// Belief updating for every node by solving one relevant subnetwork per
/// selected target until no node is pending. Posteriors agree with
/// whole-network inference.
DecompositionResult decompose_update(const BeliefNetwork& network, const Assignment& evidence,
                                     const DecompositionOptions& options = {});

inline constexpr double kMergeTolerance = 1e-9;

/// Each node's posterior comes from the first step covering it, or from a
/// point mass when it is instantiated. Throws InternalConsistencyError when
/// two covering steps differ by more than kMergeTolerance or a node is left
/// uncovered.
Posteriors merge_posteriors(const BeliefNetwork& network, const std::vector<DecompositionStep>& steps,
                            const Assignment& instantiated);

}  // namespace relnet
