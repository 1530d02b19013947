#pragma once

#include <set>

#include "relnet/network.hpp"

namespace relnet {

/// Why each node of the original network left (or stayed in) a reduced query.
/// All ids refer to the network the reduction started from. When several
/// reasons apply only the first in the order propagated, barren, d-separated,
/// nuisance, absorbed is recorded.
struct ReductionTrace {
    std::set<NodeId> removed_d_separated;
    std::set<NodeId> removed_barren;
    std::set<NodeId> removed_nuisance;
    std::set<NodeId> absorbed_evidence;
    Assignment propagated_instantiations;
    std::set<NodeId> surviving;

    bool operator==(const ReductionTrace&) const = default;
};

/// Nodes outside targets and evidence with no active trail to any target.
/// Likelihood potentials count as observed children of their scope.
/// Linear-time reachability (Bayes ball).
std::set<NodeId> d_separated_set(const BeliefNetwork& network, const Query& query);

/// Non-target, non-evidence nodes all of whose descendants are barren.
/// A node in the scope of a likelihood potential is never barren.
std::set<NodeId> barren_set(const BeliefNetwork& network, const Query& query);

/// The evidence extended with node-local deterministic implications, to a
/// fixpoint: forward sweeps in topological order, backward sweeps (through
/// CPTs of instantiated nodes and through potentials) in reverse order.
/// Throws ContradictoryEvidence naming the node whose table rules out every
/// completion of the current instantiation.
Assignment propagate_evidence(const BeliefNetwork& network, const Query& query);

/// Removes the evidence nodes. Children's CPTs are sliced on the observed
/// states. Each evidence node leaves its likelihood, its own CPT sliced on
/// all evidence, as a potential over its unobserved parents; constant
/// likelihoods are dropped. Posteriors of the remaining nodes are unchanged.
Subnetwork absorb_evidence(const BeliefNetwork& network, const Assignment& evidence);

/// Result of pruning without absorption. `query` is expressed in the
/// subnetwork's indices and includes propagated instantiations; targets that
/// were instantiated are dropped from it.
struct PrunedNetwork {
    Subnetwork sub;
    Query query;
    ReductionTrace trace;
};

/// Evidence propagation, barren removal, and d-separation removal iterated to
/// a fixpoint. Evidence nodes are kept; an evidence node whose unobserved
/// parents were all removed is detached into a root holding a point mass.
PrunedNetwork prune_irrelevant(const BeliefNetwork& network, const Query& query);

/// Fully reduced query: no evidence left, only the surviving targets.
struct RelevantNetwork {
    Subnetwork sub;
    std::set<NodeId> targets;
    ReductionTrace trace;
};

/// prune_irrelevant followed by absorb_evidence, repeated until nothing
/// changes. Target posteriors in `sub` equal those of the original query.
RelevantNetwork relevant_subnetwork(const BeliefNetwork& network, const Query& query);

/// Evidence nodes of `pruned` that still touch an unobserved node through an
/// arc or a shared potential (ids of the original network).
std::set<NodeId> relevant_evidence(const PrunedNetwork& pruned);

/// Composes two origin maps: `inner` indexes into the network that `outer`
/// indexes into.
std::vector<NodeId> compose_origin(const std::vector<NodeId>& outer, const std::vector<NodeId>& inner);

/// Folds a trace computed on a subnetwork (whose origin is `origin`) into a
/// trace on the original network.
void merge_trace(ReductionTrace& into, const ReductionTrace& step, const std::vector<NodeId>& origin);

}  // namespace relnet
