// relnet: command-line front end for the relevance-reasoning inference engine.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 unreadable or malformed input,
// 3 invalid network or query, 4 zero-probability evidence, 5 benchmark
// mismatch, 6 state space too large, 64 bad command line.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "relnet/bench.hpp"
#include "relnet/decomposition.hpp"
#include "relnet/enumeration.hpp"
#include "relnet/errors.hpp"
#include "relnet/junction_tree.hpp"
#include "relnet/netgen.hpp"
#include "relnet/network_io.hpp"
#include "relnet/pipeline.hpp"

namespace {

using namespace relnet;

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kParse = 2,
    kInvalid = 3,
    kZeroEvidence = 4,
    kMismatch = 5,
    kTooLarge = 6,
    kUsage = 64,
};

struct Inputs {
    std::string network;
    std::string evidence;
    std::string targets;
    std::string out;
};

void emit(const Json& doc, const std::string& out) {
    const std::string text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + out + "'");
    file << text;
}

Json names(const BeliefNetwork& network, const std::set<NodeId>& ids) {
    Json out = Json::array();
    for (NodeId v : ids) out.push_back(network.node(v).name);
    return out;
}

std::set<NodeId> parse_targets(const BeliefNetwork& network, const std::string& spec, const Assignment& evidence) {
    std::set<NodeId> targets;
    if (spec.empty()) {
        for (NodeId v = 0; v < network.size(); ++v) {
            if (!evidence.contains(v)) targets.insert(v);
        }
        return targets;
    }
    std::stringstream in(spec);
    std::string name;
    while (std::getline(in, name, ',')) {
        if (name.empty()) continue;
        auto id = network.find(name);
        if (!id) throw ValidationError("unknown target node '" + name + "'");
        targets.insert(*id);
    }
    return targets;
}

Query load_query(const BeliefNetwork& network, const Inputs& in) {
    Query q;
    if (!in.evidence.empty()) q.evidence = load_evidence(in.evidence, network);
    q.targets = parse_targets(network, in.targets, q.evidence);
    validate_query(network, q);
    return q;
}

Json trace_json(const BeliefNetwork& network, const ReductionTrace& trace) {
    Json t;
    t["removed_d_separated"] = names(network, trace.removed_d_separated);
    t["removed_barren"] = names(network, trace.removed_barren);
    t["removed_nuisance"] = names(network, trace.removed_nuisance);
    t["absorbed_evidence"] = names(network, trace.absorbed_evidence);
    t["propagated_instantiations"] = evidence_to_json(network, trace.propagated_instantiations);
    t["surviving"] = names(network, trace.surviving);
    return t;
}

int cmd_validate(const Inputs& in) {
    const Json doc = parse_json_text(read_text_file(in.network), in.network);
    try {
        const BeliefNetwork net = network_from_json(doc);
        Json out;
        out["ok"] = true;
        out["name"] = net.name();
        out["nodes"] = net.size();
        out["table_entries"] = net.table_entries();
        emit(out, in.out);
        return kOk;
    } catch (const ValidationError& e) {
        Json out;
        out["ok"] = false;
        Json list = Json::array();
        if (e.report().ok()) list.push_back(e.what());
        for (const auto& v : e.report().violations) list.push_back(v.message);
        out["violations"] = std::move(list);
        emit(out, in.out);
        throw;
    }
}

int cmd_infer(const Inputs& in, const std::string& engine) {
    const BeliefNetwork net = load_network(in.network);
    const Query q = load_query(net, in);
    InferenceResult r;
    if (engine == "enum") {
        r = oracle::joint_enumerate(net, q);
    } else {
        r = infer(net, q);
    }
    Json out;
    out["log_p_evidence"] = r.log_p_evidence;
    out["posteriors"] = posteriors_to_json(net, r.posteriors);
    emit(out, in.out);
    return kOk;
}

int cmd_prune(const Inputs& in, bool nuisance) {
    const BeliefNetwork net = load_network(in.network);
    const Query q = load_query(net, in);
    ReduceOptions opts;
    opts.nuisance = nuisance;
    const ReducedQuery rq = reduce_query(net, q, opts);
    Json out;
    out["network"] = network_to_json(rq.sub.network);
    std::set<NodeId> targets;
    for (NodeId t : rq.targets) targets.insert(rq.sub.origin[t]);
    out["targets"] = names(net, targets);
    out["trace"] = trace_json(net, rq.trace);
    Json graphs = Json::array();
    for (const NuisanceGraph& g : rq.nuisance_graphs) {
        Json j;
        j["anchor"] = net.node(g.anchor).name;
        j["members"] = names(net, std::set<NodeId>(g.members.begin(), g.members.end()));
        j["is_tree"] = g.is_tree;
        graphs.push_back(std::move(j));
    }
    out["nuisance_graphs"] = std::move(graphs);
    emit(out, in.out);
    return kOk;
}

int cmd_decompose(const Inputs& in, bool nuisance, bool timing, unsigned threads) {
    const BeliefNetwork net = load_network(in.network);
    Assignment evidence;
    if (!in.evidence.empty()) evidence = load_evidence(in.evidence, net);
    DecompositionOptions opts;
    opts.nuisance = nuisance;
    opts.threads = threads;
    const DecompositionResult r = decompose_update(net, evidence, opts);
    Json steps = Json::array();
    for (const DecompositionStep& s : r.steps) {
        Json j;
        j["i"] = s.index + 1;
        j["targets"] = names(net, s.targets);
        j["subnetwork"] = names(net, s.subnetwork);
        j["subnetwork_size"] = s.subnetwork.size();
        j["updated"] = names(net, s.updated);
        j["max_clique_states"] = s.max_clique_states;
        if (timing) j["millis"] = s.millis;
        steps.push_back(std::move(j));
    }
    Json out;
    out["steps"] = std::move(steps);
    out["posteriors"] = posteriors_to_json(net, r.posteriors);
    emit(out, in.out);
    return kOk;
}

int cmd_gen(const GenSpec& spec, const Inputs& in, std::optional<std::size_t> evidence_count) {
    if (!evidence_count) {
        emit(network_to_json(random_dag(spec)), in.out);
        return kOk;
    }
    const BeliefNetwork net = in.network.empty() ? random_dag(spec) : load_network(in.network);
    emit(evidence_to_json(net, sample_evidence(net, *evidence_count, spec.seed)), in.out);
    return kOk;
}

int cmd_bench(const GenSpec& spec, const Inputs& in, const BenchOptions& opts, const std::string& csv) {
    const BeliefNetwork net = in.network.empty() ? random_dag(spec) : load_network(in.network);
    const BenchReport report = run_bench(net, opts);
    print_summary(std::cout, report);
    if (!csv.empty()) {
        std::ofstream file(csv, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write '" + csv + "'");
        write_csv(file, report);
    }
    return kOk;
}

void add_gen_flags(CLI::App* cmd, GenSpec& spec) {
    cmd->add_option("--nodes", spec.nodes, "Node count");
    cmd->add_option("--max-parents", spec.max_parents, "Maximum parents per node");
    cmd->add_option("--max-states", spec.max_states, "Maximum states per node");
    cmd->add_option("--density", spec.density, "Chance each parent slot is used");
    cmd->add_option("--seed", spec.seed, "Random seed");
}

int run(int argc, char** argv) {
    CLI::App app{"Exact inference with relevance-based pruning and decomposition"};
    app.require_subcommand(1);

    Inputs in;
    GenSpec spec;
    std::string engine = "jt";
    bool nuisance = false;
    bool no_timing = false;
    unsigned threads = 1;
    std::optional<std::size_t> evidence_count;
    BenchOptions bench;
    std::string csv;

    auto* validate = app.add_subcommand("validate", "Check a network file");
    validate->add_option("--network", in.network, "Network JSON")->required();
    validate->add_option("--out", in.out, "Write output here instead of stdout");

    auto* infer_cmd = app.add_subcommand("infer", "Posteriors of the targets");
    auto* prune = app.add_subcommand("prune", "Relevant subnetwork and reduction trace");
    auto* decompose = app.add_subcommand("decompose", "All-node posteriors by relevance-based decomposition");
    for (auto* cmd : {infer_cmd, prune, decompose}) {
        cmd->add_option("--network", in.network, "Network JSON")->required();
        cmd->add_option("--evidence", in.evidence, "Evidence JSON {node: state}");
        cmd->add_option("--out", in.out, "Write output here instead of stdout");
    }
    for (auto* cmd : {infer_cmd, prune}) {
        cmd->add_option("--targets", in.targets, "Comma-separated target ids (default: all unobserved)");
    }
    infer_cmd->add_option("--engine", engine, "jt or enum")->check(CLI::IsMember({"jt", "enum"}));
    prune->add_flag("--nuisance", nuisance, "Also remove nuisance nodes");
    decompose->add_flag("--nuisance", nuisance, "Remove nuisance nodes in every step");
    decompose->add_flag("--no-timing", no_timing, "Omit per-step wall times");
    decompose->add_option("--threads", threads, "Subnetwork runs in parallel")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen", "Random network, or random evidence with --evidence");
    add_gen_flags(gen, spec);
    gen->add_option("--evidence", evidence_count, "Write K evidence nodes instead of a network");
    gen->add_option("--network", in.network, "Network to draw evidence for (default: generate one)");
    gen->add_option("--out", in.out, "Write output here instead of stdout");

    auto* bench_cmd = app.add_subcommand("bench", "Time whole-network inference against decomposition");
    add_gen_flags(bench_cmd, spec);
    bench_cmd->add_option("--network", in.network, "Network JSON (default: generate one)");
    bench_cmd->add_option("--cases", bench.cases, "Number of evidence cases");
    bench_cmd->add_option("--k", bench.evidence, "Evidence nodes per case");
    bench_cmd->add_option("--csv", csv, "Per-case CSV output");
    bench_cmd->add_option("--tolerance", bench.tolerance, "Allowed posterior deviation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "relnet: " << e.what() << '\n';
        return kUsage;
    }
    bench.seed = spec.seed;

    if (*validate) return cmd_validate(in);
    if (*infer_cmd) return cmd_infer(in, engine);
    if (*prune) return cmd_prune(in, nuisance);
    if (*decompose) return cmd_decompose(in, nuisance, !no_timing, threads);
    if (*gen) return cmd_gen(spec, in, evidence_count);
    return cmd_bench(spec, in, bench, csv);
}

std::string one_line(std::string text) {
    for (char& c : text) {
        if (c == '\n') c = ' ';
    }
    return text;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const relnet::ParseError& e) {
        std::cerr << "relnet: parse error: " << one_line(e.what()) << '\n';
        return kParse;
    } catch (const relnet::ValidationError& e) {
        std::cerr << "relnet: invalid input: " << one_line(e.what()) << '\n';
        return kInvalid;
    } catch (const relnet::CycleError& e) {
        std::cerr << "relnet: invalid input: " << one_line(e.what()) << '\n';
        return kInvalid;
    } catch (const relnet::ZeroProbabilityEvidence& e) {
        std::cerr << "relnet: zero-probability evidence: " << one_line(e.what()) << '\n';
        return kZeroEvidence;
    } catch (const relnet::BenchMismatch& e) {
        std::cerr << "relnet: benchmark mismatch: " << one_line(e.what()) << '\n';
        return kMismatch;
    } catch (const relnet::StateSpaceTooLarge& e) {
        std::cerr << "relnet: " << one_line(e.what()) << '\n';
        return kTooLarge;
    } catch (const std::invalid_argument& e) {
        std::cerr << "relnet: invalid input: " << one_line(e.what()) << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "relnet: " << one_line(e.what()) << '\n';
        return kFailure;
    }
}
