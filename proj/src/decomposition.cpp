#include "relnet/decomposition.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

#include "relnet/errors.hpp"
#include "relnet/junction_tree.hpp"
#include "relnet/pipeline.hpp"
#include "relnet/relevance.hpp"

namespace relnet {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> point_mass(std::size_t states, std::size_t at) {
    std::vector<double> p(states, 0.0);
    p[at] = 1.0;
    return p;
}

struct Job {
    ReducedQuery reduced;
    double reduce_millis = 0.0;
};

// Junction-tree run over every node of one reduced network.
void solve(const BeliefNetwork& network, Job& job, DecompositionStep& step) {
    const auto start = Clock::now();
    const BeliefNetwork& sub = job.reduced.sub.network;
    JunctionTree jt = build_junction_tree(sub);
    propagate(jt, {});
    for (NodeId v = 0; v < sub.size(); ++v) step.posteriors[job.reduced.sub.origin[v]] = clique_marginal(jt, v);
    for (const auto& [v, s] : job.reduced.trace.propagated_instantiations) {
        step.posteriors[v] = point_mass(network.cardinality(v), s);
    }
    step.max_clique_states = max_clique_states(jt);
    step.millis = job.reduce_millis + std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

NodeId select_target(const std::set<NodeId>& pending, const std::vector<NodeId>& order) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (pending.contains(*it)) return *it;
    }
    throw std::invalid_argument("select_target: no pending node");
}

TargetSelector last_in_order_selector() {
    return [](const std::set<NodeId>& pending, const std::vector<NodeId>& order, std::size_t batch) {
        std::vector<NodeId> out;
        for (auto it = order.rbegin(); it != order.rend() && out.size() < batch; ++it) {
            if (pending.contains(*it)) out.push_back(*it);
        }
        return out;
    };
}

TargetSelector forced_order_selector(std::vector<NodeId> sequence) {
    return [sequence = std::move(sequence)](const std::set<NodeId>& pending, const std::vector<NodeId>& order,
                                            std::size_t batch) {
        std::vector<NodeId> out;
        for (NodeId v : sequence) {
            if (out.size() < batch && pending.contains(v)) out.push_back(v);
        }
        if (out.empty()) return last_in_order_selector()(pending, order, batch);
        return out;
    };
}

DecompositionResult decompose_update(const BeliefNetwork& network, const Assignment& evidence,
                                     const DecompositionOptions& options) {
    validate_query(network, Query{{}, evidence});
    DecompositionResult result;
    result.instantiated = propagate_evidence(network, Query{{}, evidence});

    const TargetSelector selector = options.selector ? options.selector : last_in_order_selector();
    const std::vector<NodeId> order = topological_order(network);
    const ReduceOptions reduce{options.nuisance, {}, options.cache};
    std::set<NodeId> pending;
    for (NodeId v = 0; v < network.size(); ++v) {
        if (!result.instantiated.contains(v)) pending.insert(v);
    }

    // Target selection depends only on which nodes earlier steps covered, so
    // all reductions happen here and the junction-tree runs can be deferred.
    std::vector<Job> jobs;
    while (!pending.empty()) {
        DecompositionStep step;
        step.index = result.steps.size();
        const std::vector<NodeId> chosen = selector(pending, order, std::max<std::size_t>(options.batch_size, 1));
        if (chosen.empty()) throw std::logic_error("target selector returned no target");
        step.targets.insert(chosen.begin(), chosen.end());

        const auto start = Clock::now();
        Job job{reduce_query(network, Query{step.targets, evidence}, reduce), 0.0};
        job.reduce_millis = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

        step.subnetwork.insert(job.reduced.sub.origin.begin(), job.reduced.sub.origin.end());
        step.subnetwork.insert(job.reduced.relevant_evidence.begin(), job.reduced.relevant_evidence.end());
        for (const auto& [v, s] : job.reduced.trace.propagated_instantiations) step.subnetwork.insert(v);
        step.reduced_size = job.reduced.sub.network.size();
        for (NodeId v : step.subnetwork) {
            if (pending.erase(v) > 0) step.updated.insert(v);
        }
        for (NodeId t : step.targets) pending.erase(t);

        result.steps.push_back(std::move(step));
        jobs.push_back(std::move(job));
    }

    if (options.threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) solve(network, jobs[i], result.steps[i]);
    } else {
        for (std::size_t first = 0; first < jobs.size(); first += options.threads) {
            const std::size_t last = std::min(jobs.size(), first + options.threads);
            std::vector<std::future<void>> running;
            for (std::size_t i = first; i < last; ++i) {
                running.push_back(std::async(std::launch::async,
                                             [&, i] { solve(network, jobs[i], result.steps[i]); }));
            }
            for (auto& f : running) f.get();
        }
    }

    for (DecompositionStep& step : result.steps) {
        for (NodeId v : step.subnetwork) {
            if (auto it = result.instantiated.find(v); it != result.instantiated.end()) {
                step.posteriors[v] = point_mass(network.cardinality(v), it->second);
            }
        }
    }
    result.posteriors = merge_posteriors(network, result.steps, result.instantiated);
    return result;
}

Posteriors merge_posteriors(const BeliefNetwork& network, const std::vector<DecompositionStep>& steps,
                            const Assignment& instantiated) {
    Posteriors merged;
    for (const auto& [v, s] : instantiated) merged[v] = point_mass(network.cardinality(v), s);
    for (const DecompositionStep& step : steps) {
        for (const auto& [v, dist] : step.posteriors) {
            auto [it, fresh] = merged.emplace(v, dist);
            if (fresh) continue;
            for (std::size_t i = 0; i < dist.size(); ++i) {
                if (!(std::abs(it->second[i] - dist[i]) <= kMergeTolerance)) {
                    throw InternalConsistencyError("steps disagree on the posterior of '" + network.node(v).name +
                                                   "' (step " + std::to_string(step.index) + ")");
                }
            }
        }
    }
    for (NodeId v = 0; v < network.size(); ++v) {
        if (!merged.contains(v)) {
            throw InternalConsistencyError("node '" + network.node(v).name + "' was never updated");
        }
    }
    return merged;
}

}  // namespace relnet
