#pragma once

#include <mutex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relnet/network.hpp"

namespace relnet {

enum class NuisanceMark { Clean, Active, Nuisance };

struct NuisanceMarks {
    std::vector<NuisanceMark> mark;
    /// For nuisance nodes, the cut vertex that separates them from every
    /// active node; kInvalidNode otherwise.
    std::vector<NodeId> anchor;

    std::vector<NodeId> nuisance_nodes() const;
};

struct NuisanceGraph {
    NodeId anchor = kInvalidNode;
    std::vector<NodeId> members;  // ascending
    bool is_tree = false;

    bool operator==(const NuisanceGraph&) const = default;
};

/// Active nodes are targets, evidence, and their descendants. A node is a
/// nuisance node when removing a single vertex disconnects it (in the
/// undirected skeleton) from every active node; that vertex is its anchor.
/// Found with one low-link depth-first search per connected component.
///
/// The network must be computationally relevant for the query and carry no
/// likelihood potentials; std::invalid_argument otherwise.
NuisanceMarks mark_nuisance(const BeliefNetwork& network, const Query& query);

/// One graph per anchor; members are that anchor's nuisance ancestors.
std::vector<NuisanceGraph> find_nuisance_graphs(const BeliefNetwork& network, const NuisanceMarks& marks);

/// Absorbs bold members (members without parents) into their only child,
/// lowest index first, until the tree is gone. Members are dropped from the
/// returned network; the anchor keeps its non-member parents, in order.
Subnetwork marginalize_nuisance_tree(const BeliefNetwork& network, const NuisanceGraph& graph);

/// Replaces the anchor's CPT by its distribution given its non-member parents,
/// computed by `engine` on an auxiliary network of the members, the anchor,
/// and those parents as uniform roots. One engine call per parent configuration.
Subnetwork marginalize_nuisance_graph(const BeliefNetwork& network, const NuisanceGraph& graph,
                                      const InferenceEngine& engine);

/// Marginalized anchor CPTs keyed by (anchor name, sorted member names).
/// Entries are only meaningful for the base network they were computed on.
/// Safe to share between threads.
class AnchorCache {
public:
    struct Entry {
        std::vector<std::string> parents;
        std::vector<double> values;
    };
    using Key = std::pair<std::string, std::vector<std::string>>;

    std::optional<Entry> lookup(const Key& key);
    void store(const Key& key, Entry entry);

    std::size_t hits() const;
    std::size_t misses() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<Key, Entry> entries_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

struct NuisanceReduction {
    Subnetwork sub;
    Query query;                        // in sub's indices
    std::vector<NuisanceGraph> graphs;  // in the input network's indices
};

/// Marks, groups, and marginalizes every nuisance graph (tree path for trees).
NuisanceReduction reduce_nuisance(const BeliefNetwork& network, const Query& query,
                                  const InferenceEngine& engine, AnchorCache* cache = nullptr);

}  // namespace relnet
