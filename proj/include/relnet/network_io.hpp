#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "relnet/network.hpp"

namespace relnet {

using Json = nlohmann::ordered_json;

/// Network document: {name, nodes: [{id, states, parents, cpt}], potentials?}.
/// `cpt` is flattened over (parents..., self) with self fastest. `potentials`
/// is optional: [{scope: [ids], values: [...]}] in the same layout.
///
/// Throws ParseError for malformed documents and ValidationError for
/// documents that parse but describe an invalid network.
BeliefNetwork network_from_json(const Json& doc);
Json network_to_json(const BeliefNetwork& network);

BeliefNetwork load_network(const std::filesystem::path& path);
void save_network(const BeliefNetwork& network, const std::filesystem::path& path);

/// Evidence document: {node_id: state_label}.
Assignment evidence_from_json(const Json& doc, const BeliefNetwork& network);
Json evidence_to_json(const BeliefNetwork& network, const Assignment& evidence);
Assignment load_evidence(const std::filesystem::path& path, const BeliefNetwork& network);

/// {node_id: {state_label: probability}} in node index order.
Json posteriors_to_json(const BeliefNetwork& network, const Posteriors& posteriors);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
Json parse_json_text(const std::string& text, const std::string& what);

}  // namespace relnet
