#pragma once

#include <cstddef>
#include <set>

#include "relnet/network.hpp"

/// Brute-force reference computations. Nothing here shares code with the
/// pruning or junction-tree modules; only the network model is used.
namespace relnet::oracle {

struct EnumerationOptions {
    /// Ceiling on the product of all node cardinalities.
    std::size_t max_states = std::size_t{1} << 20;
};

/// Posteriors of the query targets by summing the chain-rule joint over every
/// configuration consistent with the evidence. Likelihood potentials carried
/// by the network multiply into each term.
///
/// Throws StateSpaceTooLarge above the ceiling and ZeroProbabilityEvidence
/// when no consistent configuration has positive mass.
InferenceResult joint_enumerate(const BeliefNetwork& network, const Query& query,
                                EnumerationOptions options = {});

/// Chain-rule probability of one full configuration (times potentials).
double joint_probability(const BeliefNetwork& network, const std::vector<std::size_t>& states);

/// Nodes outside targets and evidence with no active minimal trail to any
/// target, found by enumerating every minimal trail. At most 10 nodes.
std::set<NodeId> trail_oracle(const BeliefNetwork& network, const Query& query);

/// Union of the nodes lying on some minimal active trail between an evidence
/// node and a target. At most 10 nodes.
std::set<NodeId> evidential_trail_nodes(const BeliefNetwork& network, const Query& query);

inline constexpr std::size_t kTrailOracleMaxNodes = 10;

}  // namespace relnet::oracle
