#include "relnet/netgen.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace relnet {

namespace {

std::size_t draw_state(std::mt19937_64& rng, const double* row, std::size_t k) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    for (std::size_t j = 0; j + 1 < k; ++j) {
        if (u < row[j]) return j;
        u -= row[j];
    }
    return k - 1;
}

std::vector<std::size_t> sample_with(const BeliefNetwork& network, std::mt19937_64& rng) {
    std::vector<std::size_t> states(network.size(), 0);
    for (NodeId v : topological_order(network)) {
        const Node& node = network.node(v);
        std::size_t row = 0;
        for (std::size_t d = 0; d < node.parents.size(); ++d) {
            row = row * node.cpt.cardinalities()[d] + states[node.parents[d]];
        }
        const std::size_t k = node.states.size();
        states[v] = draw_state(rng, node.cpt.values().data() + row * k, k);
    }
    return states;
}

}  // namespace

void check_spec(const GenSpec& spec) {
    if (spec.nodes < 1) throw std::invalid_argument("node count must be at least 1");
    if (spec.max_states < 2) throw std::invalid_argument("max states must be at least 2");
    if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
}

BeliefNetwork random_dag(const GenSpec& spec) {
    check_spec(spec);
    std::mt19937_64 rng(spec.seed);
    BeliefNetwork net("gen-n" + std::to_string(spec.nodes) + "-s" + std::to_string(spec.seed));
    std::exponential_distribution<double> gamma1(1.0);
    for (std::size_t i = 0; i < spec.nodes; ++i) {
        const std::size_t slots = std::min(spec.max_parents, i);
        std::size_t count = 0;
        if (slots > 0 && spec.density > 0.0) {
            std::binomial_distribution<std::size_t> binom(slots, spec.density);
            count = binom(rng);
        }
        std::vector<NodeId> pool(i);
        for (NodeId p = 0; p < i; ++p) pool[p] = p;
        std::vector<NodeId> parents;
        std::sample(pool.begin(), pool.end(), std::back_inserter(parents), count, rng);
        std::sort(parents.begin(), parents.end());

        std::uniform_int_distribution<std::size_t> state_count(2, spec.max_states);
        const std::size_t k = state_count(rng);
        std::vector<std::string> states;
        for (std::size_t s = 0; s < k; ++s) states.push_back("s" + std::to_string(s));

        std::size_t rows = 1;
        for (NodeId p : parents) rows *= net.cardinality(p);
        std::vector<double> cpt;
        cpt.reserve(rows * k);
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(k);
            double total = 0.0;
            for (double& x : row) total += (x = gamma1(rng));
            for (double x : row) cpt.push_back(x / total);
        }
        net.add_node("x" + std::to_string(i), std::move(states), std::move(parents), std::move(cpt));
    }
    renormalize(net);
    return net;
}

std::vector<NodeId> leaves(const BeliefNetwork& network) {
    std::vector<NodeId> out;
    const auto children = network.children();
    for (NodeId v = 0; v < network.size(); ++v) {
        if (children[v].empty()) out.push_back(v);
    }
    return out;
}

std::vector<std::size_t> forward_sample(const BeliefNetwork& network, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_with(network, rng);
}

Assignment sample_evidence(const BeliefNetwork& network, std::size_t k, std::uint64_t seed,
                           std::optional<std::vector<NodeId>> eligible) {
    std::vector<NodeId> pool = eligible ? *eligible : leaves(network);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (k > pool.size()) {
        throw std::invalid_argument("cannot draw " + std::to_string(k) + " evidence nodes from " +
                                    std::to_string(pool.size()) + " eligible");
    }
    std::mt19937_64 rng(seed);
    std::vector<NodeId> chosen;
    std::sample(pool.begin(), pool.end(), std::back_inserter(chosen), k, rng);
    const std::vector<std::size_t> states = sample_with(network, rng);
    Assignment evidence;
    for (NodeId v : chosen) evidence.emplace(v, states[v]);
    return evidence;
}

}  // namespace relnet
