#include "relnet/enumeration.hpp"

#include <cmath>
#include <functional>

#include "relnet/errors.hpp"

namespace relnet::oracle {

namespace {

// Kahn order computed locally so the oracle stays self-contained.
std::vector<NodeId> chain_order(const BeliefNetwork& network) {
    const std::size_t n = network.size();
    std::vector<std::size_t> missing(n);
    std::vector<std::vector<NodeId>> kids(n);
    for (NodeId v = 0; v < n; ++v) {
        missing[v] = network.node(v).parents.size();
        for (NodeId p : network.node(v).parents) kids[p].push_back(v);
    }
    std::vector<NodeId> order;
    for (NodeId v = 0; v < n; ++v) {
        if (missing[v] == 0) order.push_back(v);
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (NodeId c : kids[order[i]]) {
            if (--missing[c] == 0) order.push_back(c);
        }
    }
    if (order.size() != n) throw std::invalid_argument("oracle: network has a cycle");
    return order;
}

double table_entry(const Factor& table, const std::vector<std::size_t>& states) {
    std::size_t index = 0;
    for (std::size_t d = 0; d < table.scope().size(); ++d) {
        index = index * table.cardinalities()[d] + states[table.scope()[d]];
    }
    return table.values()[index];
}

std::vector<std::vector<NodeId>> child_lists(const BeliefNetwork& network) {
    std::vector<std::vector<NodeId>> kids(network.size());
    for (NodeId v = 0; v < network.size(); ++v) {
        for (NodeId p : network.node(v).parents) kids[p].push_back(v);
    }
    return kids;
}

// For each node: is it in E or does it have a descendant in E.
std::vector<bool> reaches_evidence(const BeliefNetwork& network, const Assignment& evidence) {
    const auto kids = child_lists(network);
    std::vector<bool> out(network.size(), false);
    for (NodeId v = 0; v < network.size(); ++v) {
        std::vector<bool> seen(network.size(), false);
        std::vector<NodeId> stack{v};
        while (!stack.empty() && !out[v]) {
            NodeId x = stack.back();
            stack.pop_back();
            if (seen[x]) continue;
            seen[x] = true;
            if (evidence.contains(x)) out[v] = true;
            for (NodeId c : kids[x]) stack.push_back(c);
        }
    }
    return out;
}

// Enumerates minimal trails starting at `source`, keeping only prefixes whose
// interior nodes satisfy the active-trail clauses. `on_reach(path)` fires at
// every node reached by such a prefix; returning true stops the search.
class TrailWalker {
public:
    TrailWalker(const BeliefNetwork& network, const Assignment& evidence)
        : network_(network), evidence_(evidence), kids_(child_lists(network)),
          hot_(reaches_evidence(network, evidence)) {}

    bool walk(NodeId source, const std::function<bool(const std::vector<NodeId>&)>& on_reach) {
        std::vector<bool> used(network_.size(), false);
        std::vector<NodeId> path{source};
        used[source] = true;
        return extend(path, used, false, on_reach);
    }

private:
    // `arrived_down` is true when the last step followed an arc into path.back().
    bool extend(std::vector<NodeId>& path, std::vector<bool>& used, bool arrived_down,
                const std::function<bool(const std::vector<NodeId>&)>& on_reach) {
        const NodeId x = path.back();
        const bool interior_ok_noncollider = !evidence_.contains(x);
        const bool interior_ok_collider = hot_[x];
        auto step = [&](NodeId y, bool down) {
            if (used[y]) return false;
            if (path.size() > 1) {
                const bool collider = arrived_down && !down;
                if (collider ? !interior_ok_collider : !interior_ok_noncollider) return false;
            }
            used[y] = true;
            path.push_back(y);
            bool stop = on_reach(path) || extend(path, used, down, on_reach);
            path.pop_back();
            used[y] = false;
            return stop;
        };
        for (NodeId c : kids_[x]) {
            if (step(c, true)) return true;
        }
        for (NodeId p : network_.node(x).parents) {
            if (step(p, false)) return true;
        }
        return false;
    }

    const BeliefNetwork& network_;
    const Assignment& evidence_;
    std::vector<std::vector<NodeId>> kids_;
    std::vector<bool> hot_;
};

void check_trail_preconditions(const BeliefNetwork& network) {
    if (network.size() > kTrailOracleMaxNodes) {
        throw StateSpaceTooLarge("trail oracle supports at most " +
                                 std::to_string(kTrailOracleMaxNodes) + " nodes");
    }
    if (!network.potentials().empty()) {
        throw std::invalid_argument("trail oracle does not handle likelihood potentials");
    }
}

}  // namespace

double joint_probability(const BeliefNetwork& network, const std::vector<std::size_t>& states) {
    double p = 1.0;
    for (NodeId v : chain_order(network)) p *= table_entry(network.node(v).cpt, states);
    for (const Factor& f : network.potentials()) p *= table_entry(f, states);
    return p;
}

InferenceResult joint_enumerate(const BeliefNetwork& network, const Query& query,
                                EnumerationOptions options) {
    double space = 1.0;
    for (NodeId v = 0; v < network.size(); ++v) space *= static_cast<double>(network.cardinality(v));
    if (space > static_cast<double>(options.max_states)) {
        throw StateSpaceTooLarge("joint state space of " + std::to_string(space) +
                                 " exceeds the enumeration ceiling");
    }
    const std::vector<NodeId> order = chain_order(network);

    std::vector<std::size_t> states(network.size(), 0);
    std::vector<NodeId> free;
    for (NodeId v = 0; v < network.size(); ++v) {
        if (auto it = query.evidence.find(v); it != query.evidence.end()) {
            states[v] = it->second;
        } else {
            free.push_back(v);
        }
    }

    std::map<NodeId, std::vector<double>> mass;
    for (NodeId t : query.targets) mass[t].assign(network.cardinality(t), 0.0);
    double total = 0.0;
    while (true) {
        double p = 1.0;
        for (NodeId v : order) p *= table_entry(network.node(v).cpt, states);
        for (const Factor& f : network.potentials()) p *= table_entry(f, states);
        total += p;
        for (auto& [t, m] : mass) m[states[t]] += p;

        std::size_t d = free.size();
        while (d > 0) {
            const NodeId v = free[d - 1];
            if (++states[v] < network.cardinality(v)) break;
            states[v] = 0;
            --d;
        }
        if (d == 0) break;
    }
    if (!(total > 0.0)) throw ZeroProbabilityEvidence("evidence has zero probability");

    InferenceResult result;
    result.log_p_evidence = std::log(total);
    for (auto& [t, m] : mass) {
        for (double& x : m) x /= total;
        result.posteriors[t] = std::move(m);
    }
    return result;
}

std::set<NodeId> trail_oracle(const BeliefNetwork& network, const Query& query) {
    check_trail_preconditions(network);
    TrailWalker walker(network, query.evidence);
    std::set<NodeId> separated;
    for (NodeId n = 0; n < network.size(); ++n) {
        if (query.targets.contains(n) || query.evidence.contains(n)) continue;
        const bool connected = walker.walk(n, [&](const std::vector<NodeId>& path) {
            return query.targets.contains(path.back());
        });
        if (!connected) separated.insert(n);
    }
    return separated;
}

std::set<NodeId> evidential_trail_nodes(const BeliefNetwork& network, const Query& query) {
    check_trail_preconditions(network);
    TrailWalker walker(network, query.evidence);
    std::set<NodeId> on_trail;
    for (const auto& [e, state] : query.evidence) {
        (void)state;
        walker.walk(e, [&](const std::vector<NodeId>& path) {
            if (query.targets.contains(path.back())) on_trail.insert(path.begin(), path.end());
            return false;
        });
    }
    return on_trail;
}

}  // namespace relnet::oracle
