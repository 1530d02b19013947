#include "relnet/factor.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>
#include <string>

namespace relnet {

namespace {

std::size_t product(const std::vector<std::size_t>& cards) {
    return std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
}

// Row-major strides of f's own scope.
std::vector<std::size_t> own_strides(const std::vector<std::size_t>& cards) {
    std::vector<std::size_t> strides(cards.size());
    std::size_t stride = 1;
    for (std::size_t d = cards.size(); d-- > 0;) {
        strides[d] = stride;
        stride *= cards[d];
    }
    return strides;
}

// Stride of each variable of `scope` inside f (0 when f does not mention it).
std::vector<std::size_t> strides_in(const Factor& f, std::span<const NodeId> scope) {
    const auto own = own_strides(f.cardinalities());
    std::vector<std::size_t> strides(scope.size(), 0);
    for (std::size_t d = 0; d < scope.size(); ++d) {
        if (auto p = f.position(scope[d])) strides[d] = own[*p];
    }
    return strides;
}

// Walks every configuration of (cards) in row-major order while tracking N
// linear offsets, one per stride vector. `visit` receives the offsets array.
template <std::size_t N, typename Visit>
void odometer(const std::vector<std::size_t>& cards,
              const std::array<const std::vector<std::size_t>*, N>& strides, Visit&& visit) {
    const std::size_t total = product(cards);
    const std::size_t dims = cards.size();
    std::vector<std::size_t> counter(dims, 0);
    std::array<std::size_t, N> offset{};
    for (std::size_t k = 0; k < total; ++k) {
        visit(offset);
        for (std::size_t d = dims; d-- > 0;) {
            if (++counter[d] < cards[d]) {
                for (std::size_t t = 0; t < N; ++t) offset[t] += (*strides[t])[d];
                break;
            }
            for (std::size_t t = 0; t < N; ++t) offset[t] -= (*strides[t])[d] * (cards[d] - 1);
            counter[d] = 0;
        }
    }
}

void check_shared(const Factor& f, const Factor& g) {
    for (std::size_t i = 0; i < g.scope().size(); ++i) {
        if (auto p = f.position(g.scope()[i]);
            p && f.cardinalities()[*p] != g.cardinalities()[i]) {
            throw std::invalid_argument("cardinality mismatch on shared variable " +
                                        std::to_string(g.scope()[i]));
        }
    }
}

void check_subset(const Factor& target, const Factor& sub) {
    for (NodeId v : sub.scope()) {
        if (!target.contains(v)) {
            throw std::invalid_argument("variable " + std::to_string(v) +
                                        " is not in the target scope");
        }
    }
    check_shared(target, sub);
}

}  // namespace

Factor::Factor() : values_{1.0} {}

Factor::Factor(std::vector<NodeId> scope, std::vector<std::size_t> cardinalities,
               std::vector<double> values)
    : scope_(std::move(scope)), cards_(std::move(cardinalities)), values_(std::move(values)) {
    if (scope_.size() != cards_.size()) {
        throw std::invalid_argument("scope and cardinality lists differ in length");
    }
    for (std::size_t i = 0; i < scope_.size(); ++i) {
        if (cards_[i] == 0) throw std::invalid_argument("zero cardinality");
        for (std::size_t j = 0; j < i; ++j) {
            if (scope_[i] == scope_[j]) {
                throw std::invalid_argument("duplicate scope variable " + std::to_string(scope_[i]));
            }
        }
    }
    if (values_.size() != product(cards_)) {
        throw std::invalid_argument("factor has " + std::to_string(values_.size()) +
                                    " values, expected " + std::to_string(product(cards_)));
    }
}

Factor Factor::scalar(double value) { return Factor({}, {}, {value}); }

Factor Factor::ones(std::vector<NodeId> scope, std::vector<std::size_t> cardinalities) {
    const std::size_t n = product(cardinalities);
    return Factor(std::move(scope), std::move(cardinalities), std::vector<double>(n, 1.0));
}

std::optional<std::size_t> Factor::position(NodeId var) const {
    auto it = std::find(scope_.begin(), scope_.end(), var);
    if (it == scope_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - scope_.begin());
}

std::size_t Factor::cardinality(NodeId var) const {
    auto p = position(var);
    if (!p) throw std::out_of_range("variable " + std::to_string(var) + " not in factor scope");
    return cards_[*p];
}

std::size_t Factor::index_of(const Assignment& full) const {
    std::size_t index = 0;
    for (std::size_t d = 0; d < scope_.size(); ++d) {
        auto it = full.find(scope_[d]);
        if (it == full.end()) {
            throw std::invalid_argument("assignment misses variable " + std::to_string(scope_[d]));
        }
        if (it->second >= cards_[d]) throw std::out_of_range("state index out of range");
        index = index * cards_[d] + it->second;
    }
    return index;
}

double Factor::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double Factor::normalize() {
    const double z = sum();
    if (z > 0.0) {
        for (double& v : values_) v /= z;
    }
    return z;
}

void Factor::rename(std::span<const NodeId> map) {
    for (NodeId& v : scope_) v = map[v];
}

Factor multiply(const Factor& f, const Factor& g) {
    check_shared(f, g);
    std::vector<NodeId> scope = f.scope();
    std::vector<std::size_t> cards = f.cardinalities();
    for (std::size_t i = 0; i < g.scope().size(); ++i) {
        if (!f.contains(g.scope()[i])) {
            scope.push_back(g.scope()[i]);
            cards.push_back(g.cardinalities()[i]);
        }
    }
    const auto sf = strides_in(f, scope);
    const auto sg = strides_in(g, scope);
    std::vector<double> out;
    out.reserve(product(cards));
    const auto& fv = f.values();
    const auto& gv = g.values();
    odometer<2>(cards, {&sf, &sg}, [&](const auto& off) { out.push_back(fv[off[0]] * gv[off[1]]); });
    return Factor(std::move(scope), std::move(cards), std::move(out));
}

Factor marginalize(const Factor& f, std::span<const NodeId> out) {
    for (NodeId v : out) {
        if (!f.contains(v)) {
            throw std::invalid_argument("cannot marginalize variable " + std::to_string(v) +
                                        ": not in scope");
        }
    }
    if (out.empty()) return f;
    std::vector<NodeId> keep;
    std::vector<std::size_t> keep_cards;
    for (std::size_t d = 0; d < f.scope().size(); ++d) {
        if (std::find(out.begin(), out.end(), f.scope()[d]) == out.end()) {
            keep.push_back(f.scope()[d]);
            keep_cards.push_back(f.cardinalities()[d]);
        }
    }
    Factor result = Factor(keep, keep_cards, std::vector<double>(product(keep_cards), 0.0));
    const auto own = own_strides(f.cardinalities());
    const auto into = strides_in(result, f.scope());
    auto& rv = result.mutable_values();
    const auto& fv = f.values();
    odometer<2>(f.cardinalities(), {&own, &into}, [&](const auto& off) { rv[off[1]] += fv[off[0]]; });
    return result;
}

Factor marginalize_onto(const Factor& f, std::span<const NodeId> keep) {
    std::vector<NodeId> out;
    for (NodeId v : f.scope()) {
        if (std::find(keep.begin(), keep.end(), v) == keep.end()) out.push_back(v);
    }
    return marginalize(f, out);
}

Factor reduce(const Factor& f, const Assignment& assignment) {
    if (assignment.empty()) return f;
    const auto own = own_strides(f.cardinalities());
    std::size_t base = 0;
    for (const auto& [var, state] : assignment) {
        auto p = f.position(var);
        if (!p) {
            throw std::invalid_argument("cannot reduce on variable " + std::to_string(var) +
                                        ": not in scope");
        }
        if (state >= f.cardinalities()[*p]) {
            throw std::out_of_range("state " + std::to_string(state) + " invalid for variable " +
                                    std::to_string(var));
        }
        base += state * own[*p];
    }
    std::vector<NodeId> scope;
    std::vector<std::size_t> cards;
    std::vector<std::size_t> strides;
    for (std::size_t d = 0; d < f.scope().size(); ++d) {
        if (!assignment.contains(f.scope()[d])) {
            scope.push_back(f.scope()[d]);
            cards.push_back(f.cardinalities()[d]);
            strides.push_back(own[d]);
        }
    }
    std::vector<double> out;
    out.reserve(product(cards));
    const auto& fv = f.values();
    odometer<1>(cards, {&strides}, [&](const auto& off) { out.push_back(fv[base + off[0]]); });
    return Factor(std::move(scope), std::move(cards), std::move(out));
}

Factor reduce_matching(const Factor& f, const Assignment& assignment) {
    Assignment relevant;
    for (const auto& [var, state] : assignment) {
        if (f.contains(var)) relevant.emplace(var, state);
    }
    return reduce(f, relevant);
}

Factor reorder(const Factor& f, std::span<const NodeId> scope) {
    if (scope.size() != f.scope().size()) {
        throw std::invalid_argument("reorder: scope is not a permutation");
    }
    std::vector<std::size_t> cards;
    for (NodeId v : scope) cards.push_back(f.cardinality(v));
    const auto strides = strides_in(f, scope);
    std::vector<double> out;
    out.reserve(f.size());
    const auto& fv = f.values();
    odometer<1>(cards, {&strides}, [&](const auto& off) { out.push_back(fv[off[0]]); });
    return Factor(std::vector<NodeId>(scope.begin(), scope.end()), std::move(cards), std::move(out));
}

Factor canonical(const Factor& f) {
    std::vector<NodeId> sorted = f.scope();
    std::sort(sorted.begin(), sorted.end());
    return reorder(f, sorted);
}

void multiply_in_place(Factor& target, const Factor& sub) {
    check_subset(target, sub);
    const auto own = own_strides(target.cardinalities());
    const auto from = strides_in(sub, target.scope());
    auto& tv = target.mutable_values();
    const auto& sv = sub.values();
    odometer<2>(target.cardinalities(), {&own, &from},
                [&](const auto& off) { tv[off[0]] *= sv[off[1]]; });
}

void divide_in_place(Factor& target, const Factor& sub) {
    check_subset(target, sub);
    const auto own = own_strides(target.cardinalities());
    const auto from = strides_in(sub, target.scope());
    auto& tv = target.mutable_values();
    const auto& sv = sub.values();
    odometer<2>(target.cardinalities(), {&own, &from}, [&](const auto& off) {
        const double d = sv[off[1]];
        tv[off[0]] = d == 0.0 ? 0.0 : tv[off[0]] / d;
    });
}

void zero_incompatible(Factor& f, NodeId var, std::size_t state) {
    auto p = f.position(var);
    if (!p) throw std::invalid_argument("variable " + std::to_string(var) + " not in scope");
    if (state >= f.cardinalities()[*p]) throw std::out_of_range("state index out of range");
    const auto own = own_strides(f.cardinalities());
    const std::size_t stride = own[*p];
    const std::size_t card = f.cardinalities()[*p];
    auto& v = f.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if ((i / stride) % card != state) v[i] = 0.0;
    }
}

}  // namespace relnet
