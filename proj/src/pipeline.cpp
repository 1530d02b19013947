#include "relnet/pipeline.hpp"

#include <limits>

#include "relnet/enumeration.hpp"
#include "relnet/junction_tree.hpp"

namespace relnet {

ReducedQuery reduce_query(const BeliefNetwork& network, const Query& query, const ReduceOptions& options) {
    PrunedNetwork pruned = prune_irrelevant(network, query);
    ReducedQuery out;
    out.trace = pruned.trace;

    if (options.nuisance && pruned.sub.network.potentials().empty()) {
        const InferenceEngine engine = options.auxiliary_engine ? options.auxiliary_engine : default_auxiliary_engine();
        NuisanceReduction nr = reduce_nuisance(pruned.sub.network, pruned.query, engine, options.cache);
        for (NuisanceGraph g : nr.graphs) {
            g.anchor = pruned.sub.origin[g.anchor];
            for (NodeId& m : g.members) {
                m = pruned.sub.origin[m];
                out.trace.removed_nuisance.insert(m);
            }
            out.nuisance_graphs.push_back(std::move(g));
        }
        pruned.sub = {std::move(nr.sub.network), compose_origin(pruned.sub.origin, nr.sub.origin)};
        pruned.query = std::move(nr.query);
    }
    out.relevant_evidence = relevant_evidence(pruned);

    RelevantNetwork rel = relevant_subnetwork(pruned.sub.network, pruned.query);
    merge_trace(out.trace, rel.trace, pruned.sub.origin);
    out.sub = {std::move(rel.sub.network), compose_origin(pruned.sub.origin, rel.sub.origin)};
    out.targets = std::move(rel.targets);
    return out;
}

InferenceEngine default_auxiliary_engine() {
    return [](const BeliefNetwork& network, const Query& query) {
        double hidden = 1.0;
        double all = 1.0;
        for (NodeId v = 0; v < network.size(); ++v) {
            const auto k = static_cast<double>(network.cardinality(v));
            all *= k;
            if (!query.targets.contains(v) && !query.evidence.contains(v)) hidden *= k;
        }
        const oracle::EnumerationOptions limits;
        if (hidden <= static_cast<double>(kAuxiliaryEnumerationLimit) &&
            all <= static_cast<double>(limits.max_states)) {
            return oracle::joint_enumerate(network, query, limits);
        }
        return infer(network, query);
    };
}

InferenceResult infer_pruned(const BeliefNetwork& network, const Query& query, const ReduceOptions& options) {
    const ReducedQuery rq = reduce_query(network, query, options);
    InferenceResult result = infer(rq.sub.network, Query{rq.targets, {}});
    InferenceResult out;
    out.log_p_evidence = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [v, dist] : result.posteriors) out.posteriors[rq.sub.origin[v]] = dist;
    for (const auto& [v, s] : rq.trace.propagated_instantiations) {
        if (query.targets.contains(v)) {
            std::vector<double> point(network.cardinality(v), 0.0);
            point[s] = 1.0;
            out.posteriors[v] = std::move(point);
        }
    }
    return out;
}

}  // namespace relnet
