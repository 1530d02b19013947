#include "relnet/nuisance.hpp"

#include <algorithm>
#include <stdexcept>

#include "relnet/relevance.hpp"

namespace relnet {

namespace {

std::vector<std::vector<NodeId>> skeleton(const BeliefNetwork& network) {
    std::vector<std::vector<NodeId>> adj(network.size());
    for (NodeId v = 0; v < network.size(); ++v) {
        for (NodeId p : network.node(v).parents) {
            adj[v].push_back(p);
            adj[p].push_back(v);
        }
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

// Low-link search state; the tree is kept so the marking pass can walk it.
struct Search {
    std::vector<std::size_t> disc;
    std::vector<std::size_t> low;
    std::vector<std::size_t> active_below;
    std::vector<std::vector<NodeId>> tree_children;
};

constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);

void low_link(const std::vector<std::vector<NodeId>>& adj, const std::vector<bool>& active, NodeId root,
              Search& s, std::size_t& timer) {
    struct Frame {
        NodeId v;
        NodeId parent;
        std::size_t next;
    };
    std::vector<Frame> stack{{root, kInvalidNode, 0}};
    s.disc[root] = s.low[root] = timer++;
    s.active_below[root] = active[root] ? 1 : 0;
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < adj[f.v].size()) {
            const NodeId w = adj[f.v][f.next++];
            if (s.disc[w] == kUnvisited) {
                s.disc[w] = s.low[w] = timer++;
                s.active_below[w] = active[w] ? 1 : 0;
                s.tree_children[f.v].push_back(w);
                stack.push_back({w, f.v, 0});
            } else if (w != f.parent) {
                s.low[f.v] = std::min(s.low[f.v], s.disc[w]);
            }
            continue;
        }
        const Frame done = f;
        stack.pop_back();
        if (done.parent != kInvalidNode) {
            s.low[done.parent] = std::min(s.low[done.parent], s.low[done.v]);
            s.active_below[done.parent] += s.active_below[done.v];
        }
    }
}

void mark_subtree(const Search& s, NodeId top, NodeId anchor, NuisanceMarks& marks) {
    std::vector<NodeId> stack{top};
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        marks.mark[v] = NuisanceMark::Nuisance;
        marks.anchor[v] = anchor;
        for (NodeId c : s.tree_children[v]) stack.push_back(c);
    }
}

std::vector<NodeId> non_member_parents(const BeliefNetwork& network, const NuisanceGraph& graph) {
    std::vector<NodeId> out;
    for (NodeId p : network.node(graph.anchor).parents) {
        if (!std::binary_search(graph.members.begin(), graph.members.end(), p)) out.push_back(p);
    }
    return out;
}

void absorb_tree_in_place(BeliefNetwork& work, const NuisanceGraph& graph) {
    if (!graph.is_tree) throw std::invalid_argument("nuisance graph is not a tree");
    std::set<NodeId> remaining(graph.members.begin(), graph.members.end());
    while (!remaining.empty()) {
        auto bold = std::find_if(remaining.begin(), remaining.end(),
                                 [&](NodeId v) { return work.node(v).parents.empty(); });
        if (bold == remaining.end()) throw std::logic_error("nuisance tree has no bold node");
        const NodeId b = *bold;
        NodeId child = kInvalidNode;
        for (NodeId c = 0; c < work.size(); ++c) {
            const auto& ps = work.node(c).parents;
            if (std::find(ps.begin(), ps.end(), b) == ps.end()) continue;
            if (child != kInvalidNode) throw std::invalid_argument("nuisance tree member has two children");
            child = c;
        }
        if (child == kInvalidNode) throw std::invalid_argument("nuisance member has no child");
        const NodeId drop[] = {b};
        Factor cpt = marginalize(multiply(work.node(child).cpt, work.node(b).cpt), drop);
        std::vector<NodeId> parents;
        for (NodeId p : work.node(child).parents) {
            if (p != b) parents.push_back(p);
        }
        work.set_family(child, std::move(parents), std::move(cpt));
        remaining.erase(bold);
    }
}

void condition_anchor_in_place(BeliefNetwork& work, const NuisanceGraph& graph, const InferenceEngine& engine) {
    const std::vector<NodeId> outside = non_member_parents(work, graph);
    BeliefNetwork staged = work;
    staged.set_potentials({});
    std::vector<bool> keep(work.size(), false);
    for (NodeId m : graph.members) keep[m] = true;
    keep[graph.anchor] = true;
    for (NodeId o : outside) {
        keep[o] = true;
        const std::size_t k = work.cardinality(o);
        staged.set_family(o, {}, Factor({o}, {k}, std::vector<double>(k, 1.0 / static_cast<double>(k))));
    }
    const Subnetwork aux = induced_subnetwork(staged, keep);
    std::vector<NodeId> local(work.size(), kInvalidNode);
    for (NodeId i = 0; i < aux.origin.size(); ++i) local[aux.origin[i]] = i;

    std::vector<std::size_t> cards;
    for (NodeId o : outside) cards.push_back(work.cardinality(o));
    const std::size_t k = work.cardinality(graph.anchor);
    std::vector<double> values;
    std::vector<std::size_t> config(outside.size(), 0);
    while (true) {
        Query q;
        q.targets.insert(local[graph.anchor]);
        for (std::size_t d = 0; d < outside.size(); ++d) q.evidence.emplace(local[outside[d]], config[d]);
        const InferenceResult r = engine(aux.network, q);
        const auto& dist = r.posteriors.at(local[graph.anchor]);
        if (dist.size() != k) throw std::logic_error("engine returned a malformed distribution");
        values.insert(values.end(), dist.begin(), dist.end());
        std::size_t d = outside.size();
        while (d > 0) {
            if (++config[d - 1] < cards[d - 1]) break;
            config[d - 1] = 0;
            --d;
        }
        if (d == 0) break;
    }
    std::vector<NodeId> scope = outside;
    scope.push_back(graph.anchor);
    cards.push_back(k);
    work.set_family(graph.anchor, outside, Factor(std::move(scope), std::move(cards), std::move(values)));
}

Subnetwork drop_members(const BeliefNetwork& work, const std::vector<NuisanceGraph>& graphs) {
    std::vector<bool> keep(work.size(), true);
    for (const auto& g : graphs) {
        for (NodeId m : g.members) keep[m] = false;
    }
    return induced_subnetwork(work, keep);
}

}  // namespace

std::vector<NodeId> NuisanceMarks::nuisance_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < mark.size(); ++v) {
        if (mark[v] == NuisanceMark::Nuisance) out.push_back(v);
    }
    return out;
}

NuisanceMarks mark_nuisance(const BeliefNetwork& network, const Query& query) {
    validate_query(network, query);
    if (!network.potentials().empty()) {
        throw std::invalid_argument("nuisance search needs a network without likelihood potentials");
    }
    if (!barren_set(network, query).empty() || !d_separated_set(network, query).empty()) {
        throw std::invalid_argument("nuisance search needs a computationally relevant network");
    }
    const std::size_t n = network.size();
    std::vector<NodeId> seeds(query.targets.begin(), query.targets.end());
    for (const auto& [v, s] : query.evidence) seeds.push_back(v);
    const std::vector<bool> active = descendants(network, seeds);

    NuisanceMarks marks{std::vector<NuisanceMark>(n, NuisanceMark::Clean), std::vector<NodeId>(n, kInvalidNode)};
    for (NodeId v = 0; v < n; ++v) {
        if (active[v]) marks.mark[v] = NuisanceMark::Active;
    }

    const auto adj = skeleton(network);
    Search s{std::vector<std::size_t>(n, kUnvisited), std::vector<std::size_t>(n, 0),
             std::vector<std::size_t>(n, 0), std::vector<std::vector<NodeId>>(n)};
    std::size_t timer = 0;
    for (NodeId root = 0; root < n; ++root) {
        if (!active[root] || s.disc[root] != kUnvisited) continue;
        low_link(adj, active, root, s, timer);
        // Outermost separable pieces first, so every anchor lies outside them.
        std::vector<NodeId> stack{root};
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            for (NodeId u : s.tree_children[v]) {
                if (s.low[u] >= s.disc[v] && s.active_below[u] == 0) {
                    mark_subtree(s, u, v, marks);
                } else {
                    stack.push_back(u);
                }
            }
        }
    }
    return marks;
}

std::vector<NuisanceGraph> find_nuisance_graphs(const BeliefNetwork& network, const NuisanceMarks& marks) {
    std::map<NodeId, NuisanceGraph> by_anchor;
    for (NodeId v = 0; v < marks.mark.size(); ++v) {
        if (marks.mark[v] != NuisanceMark::Nuisance) continue;
        NuisanceGraph& g = by_anchor[marks.anchor[v]];
        g.anchor = marks.anchor[v];
        g.members.push_back(v);
    }
    std::vector<NuisanceGraph> graphs;
    for (auto& [anchor, g] : by_anchor) {
        std::size_t arcs = 0;
        auto inside = [&](NodeId v) {
            return v == anchor || std::binary_search(g.members.begin(), g.members.end(), v);
        };
        for (NodeId m : g.members) {
            for (NodeId c = 0; c < network.size(); ++c) {
                if (!inside(c)) continue;
                const auto& ps = network.node(c).parents;
                arcs += static_cast<std::size_t>(std::count(ps.begin(), ps.end(), m));
            }
        }
        // Connected through the anchor, so a tree exactly when arcs = nodes - 1.
        g.is_tree = arcs == g.members.size();
        graphs.push_back(std::move(g));
    }
    return graphs;
}

Subnetwork marginalize_nuisance_tree(const BeliefNetwork& network, const NuisanceGraph& graph) {
    BeliefNetwork work = network;
    absorb_tree_in_place(work, graph);
    return drop_members(work, {graph});
}

Subnetwork marginalize_nuisance_graph(const BeliefNetwork& network, const NuisanceGraph& graph,
                                      const InferenceEngine& engine) {
    BeliefNetwork work = network;
    condition_anchor_in_place(work, graph, engine);
    return drop_members(work, {graph});
}

std::optional<AnchorCache::Entry> AnchorCache::lookup(const Key& key) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void AnchorCache::store(const Key& key, Entry entry) {
    std::lock_guard lock(mutex_);
    entries_.insert_or_assign(key, std::move(entry));
}

std::size_t AnchorCache::hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t AnchorCache::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

std::size_t AnchorCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

NuisanceReduction reduce_nuisance(const BeliefNetwork& network, const Query& query,
                                  const InferenceEngine& engine, AnchorCache* cache) {
    const NuisanceMarks marks = mark_nuisance(network, query);
    NuisanceReduction out;
    out.graphs = find_nuisance_graphs(network, marks);

    BeliefNetwork work = network;
    for (const NuisanceGraph& g : out.graphs) {
        const std::vector<NodeId> outside = non_member_parents(work, g);
        std::vector<std::string> parent_names;
        for (NodeId o : outside) parent_names.push_back(work.node(o).name);
        AnchorCache::Key key{work.node(g.anchor).name, {}};
        for (NodeId m : g.members) key.second.push_back(work.node(m).name);
        std::sort(key.second.begin(), key.second.end());

        if (cache) {
            if (auto hit = cache->lookup(key); hit && hit->parents == parent_names) {
                std::vector<NodeId> scope = outside;
                scope.push_back(g.anchor);
                std::vector<std::size_t> cards;
                for (NodeId v : scope) cards.push_back(work.cardinality(v));
                work.set_family(g.anchor, outside, Factor(std::move(scope), std::move(cards), hit->values));
                continue;
            }
        }
        if (g.is_tree) {
            absorb_tree_in_place(work, g);
        } else {
            condition_anchor_in_place(work, g, engine);
        }
        if (cache) cache->store(key, {parent_names, work.node(g.anchor).cpt.values()});
    }

    out.sub = drop_members(work, out.graphs);
    std::vector<NodeId> local(network.size(), kInvalidNode);
    for (NodeId i = 0; i < out.sub.origin.size(); ++i) local[out.sub.origin[i]] = i;
    for (NodeId t : query.targets) out.query.targets.insert(local[t]);
    for (const auto& [v, s] : query.evidence) out.query.evidence.emplace(local[v], s);
    return out;
}

}  // namespace relnet
