#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relnet {

/// Malformed input document (bad JSON, missing fields, wrong types).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The arc relation contains a cycle; `from -> to` is one arc on it.
class CycleError : public std::runtime_error {
public:
    CycleError(std::size_t from, std::size_t to, const std::string& what)
        : std::runtime_error(what), from_(from), to_(to) {}
    std::size_t from() const noexcept { return from_; }
    std::size_t to() const noexcept { return to_; }

private:
    std::size_t from_;
    std::size_t to_;
};

/// Evidence has probability zero under the model.
class ZeroProbabilityEvidence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Zero-probability evidence detected locally by evidence propagation at `node`.
class ContradictoryEvidence : public ZeroProbabilityEvidence {
public:
    ContradictoryEvidence(std::size_t node, const std::string& what)
        : ZeroProbabilityEvidence(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class StateSpaceTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two exact computations that must agree did not.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace relnet
