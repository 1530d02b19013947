#include "relnet/junction_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relnet/errors.hpp"

namespace relnet {

namespace {

bool covers(const std::vector<NodeId>& sorted_vars, const std::vector<NodeId>& scope) {
    return std::all_of(scope.begin(), scope.end(),
                       [&](NodeId v) { return std::binary_search(sorted_vars.begin(), sorted_vars.end(), v); });
}

std::vector<NodeId> intersect(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    std::vector<NodeId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Factor ones_over(const std::vector<NodeId>& vars, const std::vector<std::size_t>& cards) {
    std::vector<std::size_t> c;
    for (NodeId v : vars) c.push_back(cards[v]);
    return Factor::ones(vars, std::move(c));
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
}

// Parent-first order of the tree rooted at `root`, with each clique's parent
// and connecting sepset.
struct Rooted {
    std::vector<std::size_t> order;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> via;
};

Rooted root_tree(const JunctionTree& jt, std::size_t root) {
    const std::size_t k = jt.cliques.size();
    Rooted r{{}, std::vector<std::size_t>(k, kDefaultRoot), std::vector<std::size_t>(k, kDefaultRoot)};
    std::vector<bool> seen(k, false);
    r.order.push_back(root);
    seen[root] = true;
    for (std::size_t i = 0; i < r.order.size(); ++i) {
        const std::size_t c = r.order[i];
        for (const auto& [n, s] : jt.neighbours[c]) {
            if (seen[n]) continue;
            seen[n] = true;
            r.parent[n] = c;
            r.via[n] = s;
            r.order.push_back(n);
        }
    }
    return r;
}

}  // namespace

void UndirectedGraph::add_edge(NodeId a, NodeId b) {
    if (a == b) return;
    adj[a].insert(b);
    adj[b].insert(a);
}

std::size_t UndirectedGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& s : adj) twice += s.size();
    return twice / 2;
}

UndirectedGraph moralize(const BeliefNetwork& network) {
    UndirectedGraph g(network.size());
    auto complete = [&g](const std::vector<NodeId>& vars) {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            for (std::size_t j = i + 1; j < vars.size(); ++j) g.add_edge(vars[i], vars[j]);
        }
    };
    for (const Node& node : network.nodes()) complete(node.cpt.scope());
    for (const Factor& f : network.potentials()) complete(f.scope());
    return g;
}

Triangulation triangulate(const UndirectedGraph& graph) {
    const std::size_t n = graph.size();
    std::vector<std::set<NodeId>> adj = graph.adj;
    std::vector<bool> gone(n, false);
    Triangulation out;
    std::vector<std::vector<NodeId>> elimination_cliques;

    auto fill_count = [&](NodeId v) {
        std::size_t missing = 0;
        for (auto i = adj[v].begin(); i != adj[v].end(); ++i) {
            for (auto j = std::next(i); j != adj[v].end(); ++j) {
                if (!adj[*i].contains(*j)) ++missing;
            }
        }
        return missing;
    };

    for (std::size_t step = 0; step < n; ++step) {
        NodeId best = kInvalidNode;
        std::size_t best_fill = 0;
        for (NodeId v = 0; v < n; ++v) {
            if (gone[v]) continue;
            const std::size_t f = fill_count(v);
            if (best == kInvalidNode || f < best_fill) {
                best = v;
                best_fill = f;
                if (f == 0) break;
            }
        }
        std::vector<NodeId> nbrs(adj[best].begin(), adj[best].end());
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
                if (adj[nbrs[i]].insert(nbrs[j]).second) {
                    adj[nbrs[j]].insert(nbrs[i]);
                    out.fill_edges.emplace_back(std::min(nbrs[i], nbrs[j]), std::max(nbrs[i], nbrs[j]));
                }
            }
        }
        std::vector<NodeId> clique = nbrs;
        clique.push_back(best);
        std::sort(clique.begin(), clique.end());
        elimination_cliques.push_back(std::move(clique));
        out.elimination_order.push_back(best);
        gone[best] = true;
        for (NodeId u : nbrs) adj[u].erase(best);
        adj[best].clear();
    }

    for (std::size_t i = 0; i < elimination_cliques.size(); ++i) {
        const auto& c = elimination_cliques[i];
        bool maximal = true;
        for (std::size_t j = 0; j < elimination_cliques.size() && maximal; ++j) {
            if (i == j) continue;
            const auto& d = elimination_cliques[j];
            if (std::includes(d.begin(), d.end(), c.begin(), c.end()) && (d.size() > c.size() || j < i)) {
                maximal = false;
            }
        }
        if (maximal) out.cliques.push_back(c);
    }
    return out;
}

JunctionTree build_junction_tree(const BeliefNetwork& network) {
    JunctionTree jt;
    for (NodeId v = 0; v < network.size(); ++v) jt.cardinalities.push_back(network.cardinality(v));
    const Triangulation tri = triangulate(moralize(network));
    const std::size_t k = tri.cliques.size();
    for (const auto& vars : tri.cliques) jt.cliques.push_back({vars, ones_over(vars, jt.cardinalities)});
    jt.neighbours.assign(k, {});

    struct Edge {
        std::size_t weight, a, b;
    };
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            edges.push_back({intersect(tri.cliques[a], tri.cliques[b]).size(), a, b});
        }
    }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.weight > y.weight; });
    std::vector<std::size_t> forest(k);
    std::iota(forest.begin(), forest.end(), std::size_t{0});
    for (const Edge& e : edges) {
        const std::size_t ra = find_root(forest, e.a);
        const std::size_t rb = find_root(forest, e.b);
        if (ra == rb) continue;
        forest[ra] = rb;
        std::vector<NodeId> vars = intersect(tri.cliques[e.a], tri.cliques[e.b]);
        Factor pot = ones_over(vars, jt.cardinalities);
        jt.neighbours[e.a].emplace_back(e.b, jt.sepsets.size());
        jt.neighbours[e.b].emplace_back(e.a, jt.sepsets.size());
        jt.sepsets.push_back({e.a, e.b, std::move(vars), std::move(pot)});
    }

    auto place = [&](const Factor& f) {
        for (Clique& c : jt.cliques) {
            if (covers(c.vars, f.scope())) {
                multiply_in_place(c.potential, f);
                return;
            }
        }
        throw InternalConsistencyError("no clique covers a family");
    };
    for (const Node& node : network.nodes()) place(node.cpt);
    for (const Factor& f : network.potentials()) place(f);
    for (const Clique& c : jt.cliques) jt.initial.push_back(c.potential);
    return jt;
}

std::size_t max_clique_states(const JunctionTree& jt) {
    std::size_t best = 0;
    for (const Clique& c : jt.cliques) best = std::max(best, c.potential.size());
    return best;
}

void propagate(JunctionTree& jt, const Assignment& evidence, std::size_t root) {
    jt.calibrated = false;
    jt.log_p_evidence = 0.0;
    for (std::size_t i = 0; i < jt.cliques.size(); ++i) jt.cliques[i].potential = jt.initial[i];
    for (Sepset& s : jt.sepsets) s.potential = ones_over(s.vars, jt.cardinalities);

    for (const auto& [var, state] : evidence) {
        auto it = std::find_if(jt.cliques.begin(), jt.cliques.end(), [v = var](const Clique& c) {
            return std::binary_search(c.vars.begin(), c.vars.end(), v);
        });
        if (it == jt.cliques.end()) throw std::invalid_argument("evidence variable not in the junction tree");
        zero_incompatible(it->potential, var, state);
    }
    if (jt.cliques.empty()) {
        jt.calibrated = true;
        return;
    }
    if (root == kDefaultRoot) root = jt.cliques.size() - 1;
    const Rooted r = root_tree(jt, root);

    double log_z = 0.0;
    auto absorb_constant = [&](Factor& f) {
        const double z = f.normalize();
        if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence has zero probability");
        log_z += std::log(z);
    };

    // Collect: leaves first. Each sender is normalized before its message leaves.
    for (std::size_t i = r.order.size(); i-- > 1;) {
        const std::size_t c = r.order[i];
        Sepset& s = jt.sepsets[r.via[c]];
        absorb_constant(jt.cliques[c].potential);
        Factor message = marginalize_onto(jt.cliques[c].potential, s.vars);
        Factor& target = jt.cliques[r.parent[c]].potential;
        divide_in_place(target, s.potential);
        multiply_in_place(target, message);
        s.potential = std::move(message);
    }
    absorb_constant(jt.cliques[root].potential);
    jt.log_p_evidence = log_z;

    // Distribute: parents first.
    for (std::size_t i = 1; i < r.order.size(); ++i) {
        const std::size_t c = r.order[i];
        Sepset& s = jt.sepsets[r.via[c]];
        Factor message = marginalize_onto(jt.cliques[r.parent[c]].potential, s.vars);
        Factor& target = jt.cliques[c].potential;
        divide_in_place(target, s.potential);
        multiply_in_place(target, message);
        s.potential = std::move(message);
    }
    for (Clique& c : jt.cliques) c.potential.normalize();
    for (Sepset& s : jt.sepsets) s.potential.normalize();
    jt.calibrated = true;
}

std::vector<double> clique_marginal(const JunctionTree& jt, NodeId var) {
    for (const Clique& c : jt.cliques) {
        if (std::binary_search(c.vars.begin(), c.vars.end(), var)) {
            const NodeId keep[] = {var};
            Factor m = marginalize_onto(c.potential, keep);
            m.normalize();
            return m.values();
        }
    }
    throw std::invalid_argument("variable not in the junction tree");
}

InferenceResult infer(const BeliefNetwork& network, const Query& query) {
    validate_query(network, query);
    JunctionTree jt = build_junction_tree(network);
    propagate(jt, query.evidence);
    InferenceResult result;
    result.log_p_evidence = jt.log_p_evidence;
    for (NodeId t : query.targets) result.posteriors[t] = clique_marginal(jt, t);
    return result;
}

InferenceEngine junction_tree_engine() {
    return [](const BeliefNetwork& network, const Query& query) { return infer(network, query); };
}

}  // namespace relnet
