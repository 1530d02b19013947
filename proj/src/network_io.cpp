#include "relnet/network_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "relnet/errors.hpp"

namespace relnet {

namespace {

const Json& require(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

std::vector<std::string> string_list(const Json& value, const std::string& where) {
    if (!value.is_array()) throw ParseError(where + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string()) throw ParseError(where + ": expected an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::vector<double> number_list(const Json& value, const std::string& where) {
    if (!value.is_array()) throw ParseError(where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& item : value) {
        if (!item.is_number()) throw ParseError(where + ": expected an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

Json string_array(const std::vector<std::string>& items) {
    Json out = Json::array();
    for (const auto& s : items) out.push_back(s);
    return out;
}

}  // namespace

BeliefNetwork network_from_json(const Json& doc) {
    if (!doc.is_object()) throw ParseError("network document must be a JSON object");
    std::string name = "network";
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) throw ParseError("network 'name' must be a string");
        name = it->get<std::string>();
    }
    const Json& nodes = require(doc, "nodes", "network");
    if (!nodes.is_array()) throw ParseError("network 'nodes' must be an array");

    NetworkBuilder builder(name);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Json& n = nodes[i];
        const std::string where = "node #" + std::to_string(i);
        if (!n.is_object()) throw ParseError(where + ": expected an object");
        const Json& id = require(n, "id", where);
        if (!id.is_string()) throw ParseError(where + ": 'id' must be a string");
        std::vector<std::string> parents;
        if (auto it = n.find("parents"); it != n.end()) parents = string_list(*it, where + " parents");
        builder.node(id.get<std::string>(), string_list(require(n, "states", where), where + " states"),
                     std::move(parents), number_list(require(n, "cpt", where), where + " cpt"));
    }
    if (auto it = doc.find("potentials"); it != doc.end()) {
        if (!it->is_array()) throw ParseError("network 'potentials' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const Json& p = (*it)[i];
            const std::string where = "potential #" + std::to_string(i);
            if (!p.is_object()) throw ParseError(where + ": expected an object");
            builder.potential(string_list(require(p, "scope", where), where + " scope"),
                              number_list(require(p, "values", where), where + " values"));
        }
    }
    return builder.build();
}

Json network_to_json(const BeliefNetwork& network) {
    Json doc;
    doc["name"] = network.name();
    Json nodes = Json::array();
    for (const Node& node : network.nodes()) {
        Json n;
        n["id"] = node.name;
        n["states"] = string_array(node.states);
        Json parents = Json::array();
        for (NodeId p : node.parents) parents.push_back(network.node(p).name);
        n["parents"] = std::move(parents);
        n["cpt"] = node.cpt.values();
        nodes.push_back(std::move(n));
    }
    doc["nodes"] = std::move(nodes);
    if (!network.potentials().empty()) {
        Json potentials = Json::array();
        for (const Factor& f : network.potentials()) {
            Json p;
            Json scope = Json::array();
            for (NodeId v : f.scope()) scope.push_back(network.node(v).name);
            p["scope"] = std::move(scope);
            p["values"] = f.values();
            potentials.push_back(std::move(p));
        }
        doc["potentials"] = std::move(potentials);
    }
    return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

BeliefNetwork load_network(const std::filesystem::path& path) {
    return network_from_json(parse_json_text(read_text_file(path), path.string()));
}

void save_network(const BeliefNetwork& network, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << network_to_json(network).dump(2) << '\n';
}

Assignment evidence_from_json(const Json& doc, const BeliefNetwork& network) {
    if (!doc.is_object()) throw ParseError("evidence document must be a JSON object");
    Assignment evidence;
    ValidationReport report;
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_string()) throw ParseError("evidence for '" + key + "' must be a state label");
        auto id = network.find(key);
        if (!id) {
            report.violations.push_back({Violation::Kind::DanglingArc, "evidence names unknown node '" + key + "'"});
            continue;
        }
        const auto& states = network.node(*id).states;
        auto it = std::find(states.begin(), states.end(), value.get<std::string>());
        if (it == states.end()) {
            report.violations.push_back(
                {Violation::Kind::Range, "node '" + key + "' has no state '" + value.get<std::string>() + "'"});
            continue;
        }
        evidence[*id] = static_cast<std::size_t>(it - states.begin());
    }
    if (!report.ok()) throw ValidationError(std::move(report));
    return evidence;
}

Json evidence_to_json(const BeliefNetwork& network, const Assignment& evidence) {
    Json doc = Json::object();
    for (const auto& [node, state] : evidence) {
        doc[network.node(node).name] = network.node(node).states.at(state);
    }
    return doc;
}

Assignment load_evidence(const std::filesystem::path& path, const BeliefNetwork& network) {
    return evidence_from_json(parse_json_text(read_text_file(path), path.string()), network);
}

Json posteriors_to_json(const BeliefNetwork& network, const Posteriors& posteriors) {
    Json doc = Json::object();
    for (const auto& [node, dist] : posteriors) {
        Json d = Json::object();
        const auto& states = network.node(node).states;
        for (std::size_t s = 0; s < dist.size(); ++s) d[states[s]] = dist[s];
        doc[network.node(node).name] = std::move(d);
    }
    return doc;
}

}  // namespace relnet
