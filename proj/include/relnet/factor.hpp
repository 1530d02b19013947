#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace relnet {

/// Dense index of a node inside one network.
using NodeId = std::size_t;

/// Observed or implied state index per variable.
using Assignment = std::map<NodeId, std::size_t>;

/// Nonnegative table over an ordered scope of discrete variables.
///
/// Values are stored row-major over the scope with the last variable varying
/// fastest. Factors are unnormalized in general; CPTs, likelihoods, and clique
/// potentials all use this type.
class Factor {
public:
    /// Scalar factor holding 1.
    Factor();
    Factor(std::vector<NodeId> scope, std::vector<std::size_t> cardinalities,
           std::vector<double> values);

    static Factor scalar(double value);
    static Factor ones(std::vector<NodeId> scope, std::vector<std::size_t> cardinalities);

    const std::vector<NodeId>& scope() const noexcept { return scope_; }
    const std::vector<std::size_t>& cardinalities() const noexcept { return cards_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }

    std::size_t size() const noexcept { return values_.size(); }
    bool is_scalar() const noexcept { return scope_.empty(); }

    std::optional<std::size_t> position(NodeId var) const;
    bool contains(NodeId var) const { return position(var).has_value(); }
    std::size_t cardinality(NodeId var) const;

    /// Flat index of a full assignment to the scope.
    std::size_t index_of(const Assignment& full) const;

    double sum() const;
    /// Scales the values to sum to one and returns the previous sum. A zero
    /// factor is left untouched.
    double normalize();

    /// Replaces every scope variable id through `map` (used when re-indexing
    /// subnetworks). The layout is unchanged.
    void rename(std::span<const NodeId> map);

    bool operator==(const Factor&) const = default;

private:
    std::vector<NodeId> scope_;
    std::vector<std::size_t> cards_;
    std::vector<double> values_;
};

/// Product over the ordered union of scopes: f's variables first, then g's
/// remaining variables in g's order. Throws std::invalid_argument when a
/// shared variable has different cardinalities.
Factor multiply(const Factor& f, const Factor& g);

/// Sums out `out`. Throws std::invalid_argument if a variable is not in scope.
Factor marginalize(const Factor& f, std::span<const NodeId> out);

/// Sums out everything except `keep` (scope order of f is preserved).
Factor marginalize_onto(const Factor& f, std::span<const NodeId> keep);

/// Slices f on `assignment`; every assigned variable must be in scope and
/// every state index valid, otherwise std::invalid_argument / std::out_of_range.
Factor reduce(const Factor& f, const Assignment& assignment);

/// Like reduce, ignoring assigned variables that are not in f's scope.
Factor reduce_matching(const Factor& f, const Assignment& assignment);

/// Same table with its scope permuted to `scope`.
Factor reorder(const Factor& f, std::span<const NodeId> scope);

/// Scope sorted ascending.
Factor canonical(const Factor& f);

/// target *= sub, where scope(sub) is a subset of scope(target).
void multiply_in_place(Factor& target, const Factor& sub);

/// target /= sub, where scope(sub) is a subset of scope(target); 0/0 is 0.
void divide_in_place(Factor& target, const Factor& sub);

/// Zeroes every entry whose `var` state differs from `state`.
void zero_incompatible(Factor& f, NodeId var, std::size_t state);

}  // namespace relnet
