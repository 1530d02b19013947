#include "relnet/relevance.hpp"

#include <algorithm>
#include <array>
#include <deque>

#include "relnet/errors.hpp"

namespace relnet {

namespace {

// The DAG with one extra observed node per likelihood potential, whose parents
// are the potential's scope.
struct Augmented {
    std::vector<std::vector<NodeId>> parents;
    std::vector<std::vector<NodeId>> children;
    std::vector<bool> observed;
};

Augmented augment(const BeliefNetwork& network, const Assignment& evidence) {
    const std::size_t n = network.size();
    const std::size_t total = n + network.potentials().size();
    Augmented g{std::vector<std::vector<NodeId>>(total), std::vector<std::vector<NodeId>>(total),
                std::vector<bool>(total, false)};
    for (NodeId v = 0; v < n; ++v) {
        g.parents[v] = network.node(v).parents;
        for (NodeId p : g.parents[v]) g.children[p].push_back(v);
        g.observed[v] = evidence.contains(v);
    }
    for (std::size_t i = 0; i < network.potentials().size(); ++i) {
        const NodeId virt = n + i;
        g.parents[virt] = network.potentials()[i].scope();
        for (NodeId p : g.parents[virt]) g.children[p].push_back(virt);
        g.observed[virt] = true;
    }
    return g;
}

constexpr double kImpossible = kDeterminismTolerance;

std::string node_label(const BeliefNetwork& network, NodeId v) { return "'" + network.node(v).name + "'"; }

[[noreturn]] void contradiction(const BeliefNetwork& network, NodeId v) {
    throw ContradictoryEvidence(v, "evidence is impossible at node " + node_label(network, v));
}

// Per free scope variable of `reduced`, which states occur in some entry
// above the impossibility threshold. Returns false when no entry does.
bool feasible_states(const Factor& reduced, std::vector<std::vector<bool>>& feasible) {
    const auto& cards = reduced.cardinalities();
    feasible.assign(cards.size(), {});
    for (std::size_t d = 0; d < cards.size(); ++d) feasible[d].assign(cards[d], false);
    std::vector<std::size_t> state(cards.size(), 0);
    bool any = false;
    for (double value : reduced.values()) {
        if (value > kImpossible) {
            any = true;
            for (std::size_t d = 0; d < cards.size(); ++d) feasible[d][state[d]] = true;
        }
        for (std::size_t d = cards.size(); d-- > 0;) {
            if (++state[d] < cards[d]) break;
            state[d] = 0;
        }
    }
    return any;
}

// Instantiates every free variable of `reduced` left with a single feasible state.
bool apply_backward(const Factor& reduced, Assignment& inst) {
    std::vector<std::vector<bool>> feasible;
    if (!feasible_states(reduced, feasible)) return false;
    bool changed = false;
    for (std::size_t d = 0; d < feasible.size(); ++d) {
        const auto count = std::count(feasible[d].begin(), feasible[d].end(), true);
        if (count == 1) {
            const auto state = static_cast<std::size_t>(
                std::find(feasible[d].begin(), feasible[d].end(), true) - feasible[d].begin());
            changed |= inst.emplace(reduced.scope()[d], state).second;
        }
    }
    return changed;
}

// Forward rule: every consistent parent row puts probability 1 on one state.
std::optional<std::size_t> forced_state(const Factor& reduced_cpt) {
    const std::size_t k = reduced_cpt.cardinalities().back();
    const auto& values = reduced_cpt.values();
    std::optional<std::size_t> forced;
    for (std::size_t row = 0; row < values.size(); row += k) {
        std::optional<std::size_t> sure;
        for (std::size_t j = 0; j < k; ++j) {
            if (values[row + j] >= 1.0 - kDeterminismTolerance) sure = j;
        }
        if (!sure || (forced && *forced != *sure)) return std::nullopt;
        forced = sure;
    }
    return forced;
}

std::vector<bool> removal_keep_mask(std::size_t n, const std::set<NodeId>& removed) {
    std::vector<bool> keep(n, true);
    for (NodeId v : removed) keep[v] = false;
    return keep;
}

Query remap_query(const Query& query, const std::vector<NodeId>& origin, std::size_t parent_size) {
    std::vector<NodeId> inverse(parent_size, kInvalidNode);
    for (NodeId i = 0; i < origin.size(); ++i) inverse[origin[i]] = i;
    Query out;
    for (NodeId t : query.targets) {
        if (inverse[t] != kInvalidNode) out.targets.insert(inverse[t]);
    }
    for (const auto& [v, s] : query.evidence) {
        if (inverse[v] != kInvalidNode) out.evidence.emplace(inverse[v], s);
    }
    return out;
}

}  // namespace

std::set<NodeId> d_separated_set(const BeliefNetwork& network, const Query& query) {
    const Augmented g = augment(network, query.evidence);
    const std::size_t total = g.parents.size();

    // Observed nodes and their ancestors: where a ball arriving from a parent
    // may bounce back up.
    std::vector<bool> above_evidence(total, false);
    std::vector<NodeId> stack;
    for (NodeId v = 0; v < total; ++v) {
        if (g.observed[v]) stack.push_back(v);
    }
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        if (above_evidence[v]) continue;
        above_evidence[v] = true;
        for (NodeId p : g.parents[v]) stack.push_back(p);
    }

    // Balls travel as (node, arrived_from_child). Index 0: from a parent, 1: from a child.
    std::vector<std::array<bool, 2>> visited(total, {false, false});
    std::vector<bool> reachable(total, false);
    std::deque<std::pair<NodeId, bool>> queue;
    for (NodeId t : query.targets) queue.emplace_back(t, true);
    while (!queue.empty()) {
        const auto [v, up] = queue.front();
        queue.pop_front();
        if (visited[v][up]) continue;
        visited[v][up] = true;
        if (!g.observed[v]) reachable[v] = true;
        if (up) {
            if (g.observed[v]) continue;
            for (NodeId p : g.parents[v]) queue.emplace_back(p, true);
            for (NodeId c : g.children[v]) queue.emplace_back(c, false);
        } else {
            if (!g.observed[v]) {
                for (NodeId c : g.children[v]) queue.emplace_back(c, false);
            }
            if (above_evidence[v]) {
                for (NodeId p : g.parents[v]) queue.emplace_back(p, true);
            }
        }
    }

    std::set<NodeId> separated;
    for (NodeId v = 0; v < network.size(); ++v) {
        if (!reachable[v] && !query.targets.contains(v) && !query.evidence.contains(v)) {
            separated.insert(v);
        }
    }
    return separated;
}

std::set<NodeId> barren_set(const BeliefNetwork& network, const Query& query) {
    std::vector<bool> needed(network.size(), false);
    for (NodeId t : query.targets) needed[t] = true;
    for (const auto& [v, s] : query.evidence) needed[v] = true;
    for (const Factor& f : network.potentials()) {
        for (NodeId v : f.scope()) needed[v] = true;
    }
    const auto order = topological_order(network);
    const auto children = network.children();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        for (NodeId c : children[*it]) {
            if (needed[c]) needed[*it] = true;
        }
    }
    std::set<NodeId> barren;
    for (NodeId v = 0; v < network.size(); ++v) {
        if (!needed[v]) barren.insert(v);
    }
    return barren;
}

Assignment propagate_evidence(const BeliefNetwork& network, const Query& query) {
    Assignment inst = query.evidence;
    const auto order = topological_order(network);
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId v : order) {
            if (inst.contains(v)) continue;
            if (auto s = forced_state(reduce_matching(network.node(v).cpt, inst))) {
                inst.emplace(v, *s);
                changed = true;
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            if (!inst.contains(*it)) continue;
            const Factor reduced = reduce_matching(network.node(*it).cpt, inst);
            std::vector<std::vector<bool>> feasible;
            if (!feasible_states(reduced, feasible)) contradiction(network, *it);
            changed |= apply_backward(reduced, inst);
        }
        for (const Factor& f : network.potentials()) {
            if (f.is_scalar()) continue;
            const Factor reduced = reduce_matching(f, inst);
            std::vector<std::vector<bool>> feasible;
            if (!feasible_states(reduced, feasible)) contradiction(network, f.scope().front());
            changed |= apply_backward(reduced, inst);
        }
    }
    return inst;
}

Subnetwork absorb_evidence(const BeliefNetwork& network, const Assignment& evidence) {
    if (evidence.empty()) {
        Subnetwork same{network, {}};
        for (NodeId v = 0; v < network.size(); ++v) same.origin.push_back(v);
        return same;
    }
    BeliefNetwork work = network;
    std::vector<Factor> potentials;
    auto keep_likelihood = [&](Factor f) {
        if (!f.is_scalar()) {
            potentials.push_back(std::move(f));
        } else if (!(f.values()[0] > 0.0)) {
            throw ZeroProbabilityEvidence("evidence has zero probability");
        }
    };
    for (const Factor& f : network.potentials()) keep_likelihood(reduce_matching(f, evidence));
    std::vector<bool> keep(network.size(), true);
    for (NodeId v = 0; v < network.size(); ++v) {
        const Node& node = network.node(v);
        if (evidence.contains(v)) {
            keep[v] = false;
            keep_likelihood(reduce_matching(node.cpt, evidence));
            work.set_family(v, {}, Factor::ones({v}, {node.states.size()}));
            continue;
        }
        std::vector<NodeId> parents;
        for (NodeId p : node.parents) {
            if (!evidence.contains(p)) parents.push_back(p);
        }
        if (parents.size() != node.parents.size()) {
            work.set_family(v, std::move(parents), reduce_matching(node.cpt, evidence));
        }
    }
    work.set_potentials(std::move(potentials));
    return induced_subnetwork(work, keep);
}

PrunedNetwork prune_irrelevant(const BeliefNetwork& network, const Query& query) {
    validate_query(network, query);
    PrunedNetwork out{{network, {}}, query, {}};
    for (NodeId v = 0; v < network.size(); ++v) out.sub.origin.push_back(v);

    auto drop = [&out](const std::set<NodeId>& removed) {
        Subnetwork next = induced_subnetwork(out.sub.network, removal_keep_mask(out.sub.network.size(), removed));
        out.query = remap_query(out.query, next.origin, out.sub.network.size());
        next.origin = compose_origin(out.sub.origin, next.origin);
        out.sub = std::move(next);
    };

    bool changed = true;
    while (changed) {
        changed = false;
        BeliefNetwork& net = out.sub.network;

        const Assignment extended = propagate_evidence(net, out.query);
        for (const auto& [v, s] : extended) {
            if (out.query.evidence.emplace(v, s).second) {
                out.trace.propagated_instantiations.emplace(out.sub.origin[v], s);
                out.query.targets.erase(v);
                changed = true;
            }
        }

        const std::set<NodeId> barren = barren_set(net, out.query);
        if (!barren.empty()) {
            for (NodeId v : barren) out.trace.removed_barren.insert(out.sub.origin[v]);
            drop(barren);
            changed = true;
        }

        const std::set<NodeId> separated = d_separated_set(out.sub.network, out.query);
        if (!separated.empty()) {
            BeliefNetwork& cur = out.sub.network;
            for (NodeId v : separated) out.trace.removed_d_separated.insert(out.sub.origin[v]);
            auto unobserved_kept = [&](NodeId v) {
                return !separated.contains(v) && !out.query.evidence.contains(v);
            };
            for (const auto& [e, s] : out.query.evidence) {
                const auto& parents = cur.node(e).parents;
                const bool cut = std::any_of(parents.begin(), parents.end(),
                                             [&](NodeId p) { return separated.contains(p); });
                if (!cut) continue;
                if (std::any_of(parents.begin(), parents.end(), unobserved_kept)) {
                    throw InternalConsistencyError("evidence node " + node_label(cur, e) +
                                                   " straddles a d-separated and a relevant parent");
                }
                std::vector<double> point(cur.cardinality(e), 0.0);
                point[s] = 1.0;
                cur.set_family(e, {}, Factor({e}, {cur.cardinality(e)}, std::move(point)));
            }
            std::vector<Factor> potentials;
            for (const Factor& f : cur.potentials()) {
                const auto& scope = f.scope();
                if (std::none_of(scope.begin(), scope.end(), [&](NodeId v) { return separated.contains(v); })) {
                    potentials.push_back(f);
                } else if (std::any_of(scope.begin(), scope.end(), unobserved_kept)) {
                    throw InternalConsistencyError("likelihood potential straddles a d-separated node");
                }
            }
            cur.set_potentials(std::move(potentials));
            drop(separated);
            changed = true;
        }
    }
    out.trace.surviving.insert(out.sub.origin.begin(), out.sub.origin.end());
    return out;
}

RelevantNetwork relevant_subnetwork(const BeliefNetwork& network, const Query& query) {
    validate_query(network, query);
    RelevantNetwork out;
    BeliefNetwork current = network;
    std::vector<NodeId> origin(network.size());
    for (NodeId v = 0; v < network.size(); ++v) origin[v] = v;
    Query q = query;

    while (true) {
        PrunedNetwork pruned = prune_irrelevant(current, q);
        merge_trace(out.trace, pruned.trace, origin);
        const std::vector<NodeId> kept = compose_origin(origin, pruned.sub.origin);
        const bool removed = pruned.sub.network.size() != current.size();
        if (pruned.query.evidence.empty() && !removed) {
            out.sub = {std::move(pruned.sub.network), kept};
            out.targets = pruned.query.targets;
            break;
        }
        for (const auto& [e, s] : pruned.query.evidence) {
            if (!out.trace.propagated_instantiations.contains(kept[e])) {
                out.trace.absorbed_evidence.insert(kept[e]);
            }
        }
        Subnetwork absorbed = absorb_evidence(pruned.sub.network, pruned.query.evidence);
        q = remap_query(Query{pruned.query.targets, {}}, absorbed.origin, pruned.sub.network.size());
        origin = compose_origin(kept, absorbed.origin);
        current = std::move(absorbed.network);
    }
    out.trace.surviving = std::set<NodeId>(out.sub.origin.begin(), out.sub.origin.end());
    return out;
}

std::set<NodeId> relevant_evidence(const PrunedNetwork& pruned) {
    const BeliefNetwork& net = pruned.sub.network;
    const Assignment& evidence = pruned.query.evidence;
    std::vector<bool> touches(net.size(), false);
    const auto children = net.children();
    for (NodeId v = 0; v < net.size(); ++v) {
        if (evidence.contains(v)) continue;
        for (NodeId p : net.node(v).parents) touches[p] = true;
        for (NodeId c : children[v]) touches[c] = true;
    }
    for (const Factor& f : net.potentials()) {
        const auto& scope = f.scope();
        if (std::any_of(scope.begin(), scope.end(), [&](NodeId v) { return !evidence.contains(v); })) {
            for (NodeId v : scope) touches[v] = true;
        }
    }
    std::set<NodeId> out;
    for (const auto& [e, s] : evidence) {
        if (touches[e]) out.insert(pruned.sub.origin[e]);
    }
    return out;
}

std::vector<NodeId> compose_origin(const std::vector<NodeId>& outer, const std::vector<NodeId>& inner) {
    std::vector<NodeId> out;
    out.reserve(inner.size());
    for (NodeId v : inner) out.push_back(outer[v]);
    return out;
}

void merge_trace(ReductionTrace& into, const ReductionTrace& step, const std::vector<NodeId>& origin) {
    for (NodeId v : step.removed_d_separated) into.removed_d_separated.insert(origin[v]);
    for (NodeId v : step.removed_barren) into.removed_barren.insert(origin[v]);
    for (NodeId v : step.removed_nuisance) into.removed_nuisance.insert(origin[v]);
    for (NodeId v : step.absorbed_evidence) {
        if (!into.propagated_instantiations.contains(origin[v])) into.absorbed_evidence.insert(origin[v]);
    }
    for (const auto& [v, s] : step.propagated_instantiations) into.propagated_instantiations.emplace(origin[v], s);
    into.surviving.clear();
    for (NodeId v : step.surviving) into.surviving.insert(origin[v]);
}

}  // namespace relnet
