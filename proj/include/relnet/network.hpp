#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relnet/factor.hpp"

namespace relnet {

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();

/// Rows further than this from 1 are rejected; closer rows are renormalized.

/// Rows whose sum is this close to 1 already satisfy the CPT invariant.
inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-6;

/// Tolerance used when comparing probabilities to exactly 0 or 1.
inline constexpr double kDeterminismTolerance = 1e-12;

struct Node {
    std::string name;
    std::vector<std::string> states;
    std::vector<NodeId> parents;
    /// Scope is (parents..., self), self varying fastest.
    Factor cpt;

    bool operator==(const Node&) const = default;
};

/// Discrete Bayesian network. Nodes are addressed by dense index; names and
/// state labels only matter at the file boundary.
///
/// Besides CPTs a network may carry likelihood potentials: nonnegative factors
/// left behind when observed nodes are absorbed. They multiply into the joint
/// like an observed child of their scope and make it unnormalized.
class BeliefNetwork {
public:
    BeliefNetwork() = default;
    explicit BeliefNetwork(std::string name) : name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    NodeId add_node(Node node);
    /// Parents must already be present; `cpt` is flattened over (parents..., self).
    NodeId add_node(std::string name, std::vector<std::string> states,
                    std::vector<NodeId> parents, std::vector<double> cpt);
    void add_potential(Factor potential) { potentials_.push_back(std::move(potential)); }

    /// Replaces a node's parent list and CPT.
    void set_family(NodeId id, std::vector<NodeId> parents, Factor cpt);
    void set_potentials(std::vector<Factor> potentials) { potentials_ = std::move(potentials); }

    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Factor>& potentials() const noexcept { return potentials_; }
    std::size_t cardinality(NodeId id) const { return nodes_.at(id).states.size(); }

    std::optional<NodeId> find(std::string_view name) const;
    /// Throws std::out_of_range on unknown names.
    NodeId at(std::string_view name) const;

    std::vector<std::vector<NodeId>> children() const;

    /// Total number of CPT and potential entries.
    std::size_t table_entries() const;

    bool operator==(const BeliefNetwork& other) const {
        return name_ == other.name_ && nodes_ == other.nodes_ && potentials_ == other.potentials_;
    }

private:
    std::string name_;
    std::vector<Node> nodes_;
    std::vector<Factor> potentials_;
    std::unordered_map<std::string, NodeId> index_;
};

/// Target set and evidence assignment.
struct Query {
    std::set<NodeId> targets;
    Assignment evidence;
};

struct Violation {
    enum class Kind { Cycle, Normalization, Range, DanglingArc, DuplicateId, Shape, TooFewStates };
    Kind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
    std::size_t count(Violation::Kind kind) const;
    std::string summary() const;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(ValidationReport report);
    explicit ValidationError(const std::string& message);
    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

/// Lists every violated structural or numerical invariant. CPT rows may deviate
/// from 1 by at most `tolerance`.
ValidationReport validate(const BeliefNetwork& network, double tolerance = kNormalizationTolerance);

/// Rescales CPT rows whose sum is off by more than kRowSumTolerance. Rows
/// already within it are left bit-for-bit alone, so loading is idempotent.
void renormalize(BeliefNetwork& network);

/// Throws ValidationError when the query references unknown nodes or states,
/// or when targets and evidence overlap.
void validate_query(const BeliefNetwork& network, const Query& query);

/// Parents before children; ties go to the lower declaration index.
/// Throws CycleError naming an arc on a cycle.
std::vector<NodeId> topological_order(const BeliefNetwork& network);

/// Seeds plus everything reachable along arcs (children direction).
std::vector<bool> descendants(const BeliefNetwork& network, const std::vector<NodeId>& seeds);
/// Seeds plus everything reachable against arcs.
std::vector<bool> ancestors(const BeliefNetwork& network, const std::vector<NodeId>& seeds);

/// A network cut out of a larger one. `origin[i]` is the index in the parent
/// network of node i.
struct Subnetwork {
    BeliefNetwork network;
    std::vector<NodeId> origin;
};

/// Keeps the listed nodes (in ascending index order). Every kept node's parents
/// must be kept too; potentials must only mention kept nodes.
Subnetwork induced_subnetwork(const BeliefNetwork& network, const std::vector<bool>& keep);

using Posteriors = std::map<NodeId, std::vector<double>>;

struct InferenceResult {
    Posteriors posteriors;
    double log_p_evidence = 0.0;
};

/// Any exact engine answering a query on a network.
using InferenceEngine = std::function<InferenceResult(const BeliefNetwork&, const Query&)>;

/// Name-based construction used by the file loader and by fixtures.
class NetworkBuilder {
public:
    explicit NetworkBuilder(std::string name = "network") : name_(std::move(name)) {}

    NetworkBuilder& node(std::string id, std::vector<std::string> states,
                         std::vector<std::string> parents, std::vector<double> cpt);
    NetworkBuilder& potential(std::vector<std::string> scope, std::vector<double> values);

    /// Resolves names, validates, and renormalizes. Throws ValidationError.
    BeliefNetwork build() const;
    /// Resolves names only; throws ValidationError on duplicate ids, dangling
    /// parents, or table shape mismatches.
    BeliefNetwork build_unchecked() const;

private:
    struct PendingNode {
        std::string id;
        std::vector<std::string> states;
        std::vector<std::string> parents;
        std::vector<double> cpt;
    };
    struct PendingPotential {
        std::vector<std::string> scope;
        std::vector<double> values;
    };
    std::string name_;
    std::vector<PendingNode> nodes_;
    std::vector<PendingPotential> potentials_;
};

}  // namespace relnet
