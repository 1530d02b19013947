#include "relnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "relnet/errors.hpp"

namespace relnet {

namespace {

std::string describe_parent_config(const BeliefNetwork& network, const Node& node,
                                   std::size_t row) {
    if (node.parents.empty()) return "(no parents)";
    std::vector<std::size_t> states(node.parents.size());
    for (std::size_t d = node.parents.size(); d-- > 0;) {
        const std::size_t card = network.cardinality(node.parents[d]);
        states[d] = row % card;
        row /= card;
    }
    std::string out;
    for (std::size_t d = 0; d < node.parents.size(); ++d) {
        const Node& p = network.node(node.parents[d]);
        if (d) out += ", ";
        out += p.name + "=" + p.states[states[d]];
    }
    return out;
}

bool parents_resolved(const BeliefNetwork& network, const Node& node) {
    return std::all_of(node.parents.begin(), node.parents.end(),
                       [&](NodeId p) { return p < network.size(); });
}

}  // namespace

NodeId BeliefNetwork::add_node(Node node) {
    const NodeId id = nodes_.size();
    index_.try_emplace(node.name, id);
    nodes_.push_back(std::move(node));
    return id;
}

NodeId BeliefNetwork::add_node(std::string name, std::vector<std::string> states,
                               std::vector<NodeId> parents, std::vector<double> cpt) {
    const NodeId id = nodes_.size();
    std::vector<NodeId> scope = parents;
    std::vector<std::size_t> cards;
    for (NodeId p : parents) cards.push_back(cardinality(p));
    scope.push_back(id);
    cards.push_back(states.size());
    Factor table(std::move(scope), std::move(cards), std::move(cpt));
    return add_node(Node{std::move(name), std::move(states), std::move(parents), std::move(table)});
}

void BeliefNetwork::set_family(NodeId id, std::vector<NodeId> parents, Factor cpt) {
    Node& n = nodes_.at(id);
    n.parents = std::move(parents);
    n.cpt = std::move(cpt);
}

std::optional<NodeId> BeliefNetwork::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeId BeliefNetwork::at(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw std::out_of_range("unknown node '" + std::string(name) + "'");
}

std::vector<std::vector<NodeId>> BeliefNetwork::children() const {
    std::vector<std::vector<NodeId>> out(nodes_.size());
    for (NodeId v = 0; v < nodes_.size(); ++v) {
        for (NodeId p : nodes_[v].parents) {
            if (p < nodes_.size()) out[p].push_back(v);
        }
    }
    return out;
}

std::size_t BeliefNetwork::table_entries() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) n += node.cpt.size();
    for (const auto& f : potentials_) n += f.size();
    return n;
}

std::size_t ValidationReport::count(Violation::Kind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

std::string ValidationReport::summary() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.message;
    }
    return out;
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("invalid network: " + report.summary()), report_(std::move(report)) {}

ValidationError::ValidationError(const std::string& message) : std::runtime_error(message) {}

ValidationReport validate(const BeliefNetwork& network, double tolerance) {
    ValidationReport report;
    auto add = [&](Violation::Kind kind, std::string message) {
        report.violations.push_back({kind, std::move(message)});
    };

    std::set<std::string> seen;
    for (const auto& node : network.nodes()) {
        if (!seen.insert(node.name).second) add(Violation::Kind::DuplicateId, "duplicate node id '" + node.name + "'");
    }

    bool structure_ok = true;
    for (NodeId v = 0; v < network.size(); ++v) {
        const Node& node = network.node(v);
        if (node.states.size() < 2) {
            add(Violation::Kind::TooFewStates, "node '" + node.name + "' has fewer than 2 states");
        }
        for (NodeId p : node.parents) {
            if (p >= network.size()) {
                add(Violation::Kind::DanglingArc, "node '" + node.name + "' has a dangling parent arc");
                structure_ok = false;
            }
        }
        std::set<NodeId> unique(node.parents.begin(), node.parents.end());
        if (unique.size() != node.parents.size() || unique.contains(v)) {
            add(Violation::Kind::Shape, "node '" + node.name + "' has a repeated or self parent");
            structure_ok = false;
        }
    }

    if (structure_ok) {
        try {
            topological_order(network);
        } catch (const CycleError& e) {
            add(Violation::Kind::Cycle, e.what());
        }
    }

    for (NodeId v = 0; v < network.size(); ++v) {
        const Node& node = network.node(v);
        if (!parents_resolved(network, node)) continue;
        std::vector<NodeId> expected_scope = node.parents;
        expected_scope.push_back(v);
        std::vector<std::size_t> expected_cards;
        for (NodeId id : expected_scope) expected_cards.push_back(network.cardinality(id));
        if (node.cpt.scope() != expected_scope || node.cpt.cardinalities() != expected_cards) {
            add(Violation::Kind::Shape, "CPT of '" + node.name + "' does not match its family");
            continue;
        }
        const auto& values = node.cpt.values();
        bool in_range = true;
        for (double x : values) {
            if (!(x >= 0.0 && x <= 1.0)) in_range = false;
        }
        if (!in_range) add(Violation::Kind::Range, "CPT of '" + node.name + "' has entries outside [0, 1]");
        const std::size_t k = node.states.size();
        const std::size_t rows = values.size() / k;
        for (std::size_t r = 0; r < rows; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += values[r * k + j];
            if (!(std::fabs(s - 1.0) <= tolerance)) {
                std::ostringstream msg;
                msg << "CPT row of '" << node.name << "' for "
                    << describe_parent_config(network, node, r) << " sums to " << s;
                add(Violation::Kind::Normalization, msg.str());
            }
        }
    }

    for (std::size_t i = 0; i < network.potentials().size(); ++i) {
        const Factor& f = network.potentials()[i];
        bool ok = true;
        for (std::size_t d = 0; d < f.scope().size(); ++d) {
            if (f.scope()[d] >= network.size() || network.cardinality(f.scope()[d]) != f.cardinalities()[d]) ok = false;
        }
        for (double x : f.values()) {
            if (!(x >= 0.0) || !std::isfinite(x)) ok = false;
        }
        if (!ok) add(Violation::Kind::Shape, "potential " + std::to_string(i) + " is malformed");
    }
    return report;
}

void renormalize(BeliefNetwork& network) {
    for (NodeId v = 0; v < network.size(); ++v) {
        const Node& node = network.node(v);
        Factor cpt = node.cpt;
        auto& values = cpt.mutable_values();
        const std::size_t k = node.states.size();
        for (std::size_t r = 0; r < values.size() / k; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += values[r * k + j];
            if (s > 0.0 && std::abs(s - 1.0) > kRowSumTolerance) {
                for (std::size_t j = 0; j < k; ++j) values[r * k + j] /= s;
            }
        }
        network.set_family(v, node.parents, std::move(cpt));
    }
}

void validate_query(const BeliefNetwork& network, const Query& query) {
    ValidationReport report;
    for (NodeId t : query.targets) {
        if (t >= network.size()) {
            report.violations.push_back({Violation::Kind::DanglingArc, "target index out of range"});
        }
    }
    for (const auto& [node, state] : query.evidence) {
        if (node >= network.size()) {
            report.violations.push_back({Violation::Kind::DanglingArc, "evidence index out of range"});
            continue;
        }
        if (state >= network.cardinality(node)) {
            report.violations.push_back(
                {Violation::Kind::Range, "invalid state for evidence node '" + network.node(node).name + "'"});
        }
        if (query.targets.contains(node)) {
            report.violations.push_back(
                {Violation::Kind::Shape, "node '" + network.node(node).name + "' is both target and evidence"});
        }
    }
    if (!report.ok()) throw ValidationError(std::move(report));
}

std::vector<NodeId> topological_order(const BeliefNetwork& network) {
    const std::size_t n = network.size();
    const auto children = network.children();
    std::vector<std::size_t> indegree(n, 0);
    for (NodeId v = 0; v < n; ++v) indegree[v] = network.node(v).parents.size();

    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < n; ++v) {
        if (indegree[v] == 0) ready.push(v);
    }
    std::vector<NodeId> order;
    order.reserve(n);
    while (!ready.empty()) {
        const NodeId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (NodeId c : children[v]) {
            if (--indegree[c] == 0) ready.push(c);
        }
    }
    if (order.size() == n) return order;

    // Every remaining node has a remaining parent; walking parents must repeat.
    NodeId v = 0;
    while (indegree[v] == 0) ++v;
    std::vector<bool> on_walk(n, false);
    while (!on_walk[v]) {
        on_walk[v] = true;
        for (NodeId p : network.node(v).parents) {
            if (indegree[p] > 0) {
                v = p;
                break;
            }
        }
    }
    // v repeated, so the parent the walk takes from v lies on the cycle too.
    NodeId parent = kInvalidNode;
    for (NodeId p : network.node(v).parents) {
        if (indegree[p] > 0) {
            parent = p;
            break;
        }
    }
    throw CycleError(parent, v,
                     "cycle detected through arc " + network.node(parent).name + " -> " +
                         network.node(v).name);
}

std::vector<bool> descendants(const BeliefNetwork& network, const std::vector<NodeId>& seeds) {
    const auto children = network.children();
    std::vector<bool> mark(network.size(), false);
    std::vector<NodeId> stack(seeds.begin(), seeds.end());
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        if (mark[v]) continue;
        mark[v] = true;
        for (NodeId c : children[v]) stack.push_back(c);
    }
    return mark;
}

std::vector<bool> ancestors(const BeliefNetwork& network, const std::vector<NodeId>& seeds) {
    std::vector<bool> mark(network.size(), false);
    std::vector<NodeId> stack(seeds.begin(), seeds.end());
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        if (mark[v]) continue;
        mark[v] = true;
        for (NodeId p : network.node(v).parents) stack.push_back(p);
    }
    return mark;
}

Subnetwork induced_subnetwork(const BeliefNetwork& network, const std::vector<bool>& keep) {
    Subnetwork sub{BeliefNetwork(network.name()), {}};
    std::vector<NodeId> map(network.size(), kInvalidNode);
    for (NodeId v = 0; v < network.size(); ++v) {
        if (keep[v]) {
            map[v] = sub.origin.size();
            sub.origin.push_back(v);
        }
    }
    for (NodeId v : sub.origin) {
        Node node = network.node(v);
        for (NodeId& p : node.parents) {
            if (map[p] == kInvalidNode) {
                throw std::invalid_argument("induced_subnetwork: parent of kept node '" + node.name +
                                            "' was dropped");
            }
            p = map[p];
        }
        node.cpt.rename(map);
        sub.network.add_node(std::move(node));
    }
    for (Factor f : network.potentials()) {
        for (NodeId v : f.scope()) {
            if (map[v] == kInvalidNode) {
                throw std::invalid_argument("induced_subnetwork: potential mentions a dropped node");
            }
        }
        f.rename(map);
        sub.network.add_potential(std::move(f));
    }
    return sub;
}

NetworkBuilder& NetworkBuilder::node(std::string id, std::vector<std::string> states,
                                     std::vector<std::string> parents, std::vector<double> cpt) {
    nodes_.push_back({std::move(id), std::move(states), std::move(parents), std::move(cpt)});
    return *this;
}

NetworkBuilder& NetworkBuilder::potential(std::vector<std::string> scope, std::vector<double> values) {
    potentials_.push_back({std::move(scope), std::move(values)});
    return *this;
}

BeliefNetwork NetworkBuilder::build_unchecked() const {
    ValidationReport report;
    std::unordered_map<std::string, NodeId> index;
    for (NodeId v = 0; v < nodes_.size(); ++v) {
        if (!index.try_emplace(nodes_[v].id, v).second) {
            report.violations.push_back({Violation::Kind::DuplicateId, "duplicate node id '" + nodes_[v].id + "'"});
        }
    }
    auto resolve = [&](const std::string& owner, const std::string& name) -> NodeId {
        auto it = index.find(name);
        if (it == index.end()) {
            report.violations.push_back(
                {Violation::Kind::DanglingArc, "'" + owner + "' references unknown node '" + name + "'"});
            return kInvalidNode;
        }
        return it->second;
    };

    BeliefNetwork network(name_);
    for (NodeId v = 0; v < nodes_.size(); ++v) {
        const PendingNode& pending = nodes_[v];
        std::vector<NodeId> parents;
        std::vector<NodeId> scope;
        std::vector<std::size_t> cards;
        bool resolved = true;
        for (const auto& p : pending.parents) {
            const NodeId id = resolve(pending.id, p);
            if (id == kInvalidNode) {
                resolved = false;
                continue;
            }
            parents.push_back(id);
            scope.push_back(id);
            cards.push_back(nodes_[id].states.size());
        }
        scope.push_back(v);
        cards.push_back(pending.states.size());
        std::size_t expected = 1;
        for (auto c : cards) expected *= c;
        if (!resolved) continue;
        if (expected != pending.cpt.size() || pending.states.empty()) {
            report.violations.push_back({Violation::Kind::Shape, "CPT of '" + pending.id + "' has " +
                                                                      std::to_string(pending.cpt.size()) +
                                                                      " entries, expected " +
                                                                      std::to_string(expected)});
            continue;
        }
        if (std::set<NodeId>(parents.begin(), parents.end()).size() != parents.size() ||
            std::find(parents.begin(), parents.end(), v) != parents.end()) {
            report.violations.push_back({Violation::Kind::Shape, "node '" + pending.id + "' has a repeated or self parent"});
            continue;
        }
        network.add_node(Node{pending.id, pending.states, std::move(parents),
                              Factor(std::move(scope), std::move(cards), pending.cpt)});
    }
    for (const auto& pending : potentials_) {
        std::vector<NodeId> scope;
        std::vector<std::size_t> cards;
        bool resolved = true;
        for (const auto& name : pending.scope) {
            const NodeId id = resolve("potential", name);
            if (id == kInvalidNode) {
                resolved = false;
                continue;
            }
            scope.push_back(id);
            cards.push_back(nodes_[id].states.size());
        }
        if (!resolved) continue;
        std::size_t expected = 1;
        for (auto c : cards) expected *= c;
        if (expected != pending.values.size() || std::set<NodeId>(scope.begin(), scope.end()).size() != scope.size()) {
            report.violations.push_back({Violation::Kind::Shape, "potential table has the wrong shape"});
            continue;
        }
        network.add_potential(Factor(std::move(scope), std::move(cards), pending.values));
    }
    if (!report.ok()) throw ValidationError(std::move(report));
    return network;
}

BeliefNetwork NetworkBuilder::build() const {
    BeliefNetwork network = build_unchecked();
    ValidationReport report = validate(network);
    if (!report.ok()) throw ValidationError(std::move(report));
    renormalize(network);
    return network;
}

}  // namespace relnet
