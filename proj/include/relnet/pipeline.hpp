#pragma once

#include <set>
#include <vector>

#include "relnet/network.hpp"
#include "relnet/nuisance.hpp"
#include "relnet/relevance.hpp"

namespace relnet {

struct ReduceOptions {
    bool nuisance = false;
    /// Engine for non-tree nuisance graphs; empty selects default_auxiliary_engine().
    InferenceEngine auxiliary_engine;
    AnchorCache* cache = nullptr;
};

struct ReducedQuery {
    /// Evidence-free network answering the query; origin maps into the input.
    Subnetwork sub;
    std::set<NodeId> targets;  // sub's indices
    ReductionTrace trace;
    std::vector<NuisanceGraph> nuisance_graphs;  // input indices
    /// Evidence nodes adjacent to the relevant part before absorption (input indices).
    std::set<NodeId> relevant_evidence;
};

/// Pruning, then (optionally) nuisance reduction while the evidence is still
/// in place, then absorption, repeated until stable.
ReducedQuery reduce_query(const BeliefNetwork& network, const Query& query, const ReduceOptions& options = {});

/// Enumeration when the unobserved non-target nodes of the network it is given
/// have at most 16 joint configurations, the junction tree otherwise.
InferenceEngine default_auxiliary_engine();

inline constexpr std::size_t kAuxiliaryEnumerationLimit = 16;

/// Junction-tree posteriors of the targets computed on the reduced network.
/// Targets fixed by evidence propagation get point masses. Pr(evidence) is not
/// recoverable after absorption, so log_p_evidence is NaN.
InferenceResult infer_pruned(const BeliefNetwork& network, const Query& query, const ReduceOptions& options = {});

}  // namespace relnet
