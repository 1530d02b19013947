#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "relnet/network.hpp"

namespace relnet {

struct GenSpec {
    std::size_t nodes = 10;
    std::size_t max_parents = 2;
    std::size_t max_states = 2;
    /// Chance that each of a node's candidate parent slots is filled.
    double density = 0.5;
    std::uint64_t seed = 1;
};

/// Throws std::invalid_argument for out-of-range fields.
void check_spec(const GenSpec& spec);

/// Node i ("x<i>") draws Binomial(min(max_parents, i), density) distinct
/// parents uniformly among lower indices and 2..max_states states; CPT rows
/// are uniform on the simplex.
BeliefNetwork random_dag(const GenSpec& spec);

/// Nodes without children.
std::vector<NodeId> leaves(const BeliefNetwork& network);

/// `k` distinct nodes from `eligible` (default: the leaves) observed at the
/// states of one forward sample, so Pr(evidence) > 0.
/// Throws std::invalid_argument when k exceeds the eligible count.
Assignment sample_evidence(const BeliefNetwork& network, std::size_t k, std::uint64_t seed,
                           std::optional<std::vector<NodeId>> eligible = std::nullopt);

/// One joint configuration drawn by ancestral sampling.
std::vector<std::size_t> forward_sample(const BeliefNetwork& network, std::uint64_t seed);

}  // namespace relnet
