#include "relnet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "relnet/decomposition.hpp"
#include "relnet/junction_tree.hpp"
#include "relnet/netgen.hpp"

namespace relnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_deviation(const BeliefNetwork& network, const Posteriors& a, const Posteriors& b) {
    double worst = 0.0;
    for (NodeId v = 0; v < network.size(); ++v) {
        const auto& x = a.at(v);
        const auto& y = b.at(v);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = std::abs(x[i] - y[i]);
            worst = std::isnan(d) ? INFINITY : std::max(worst, d);
        }
    }
    return worst;
}

std::string fixed(double value, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << value;
    return s.str();
}

}  // namespace

std::string config_label(BenchConfig config) {
    switch (config) {
        case BenchConfig::Whole: return "Whole netw.";
        case BenchConfig::DecNuisance: return "Dec+NuisRem";
        case BenchConfig::Dec: return "Dec";
    }
    return "?";
}

std::string config_key(BenchConfig config) {
    switch (config) {
        case BenchConfig::Whole: return "whole";
        case BenchConfig::DecNuisance: return "dec_nuis";
        case BenchConfig::Dec: return "dec";
    }
    return "?";
}

Summary summarize(std::vector<double> values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    // Keep min <= median <= max exact despite averaging.
    s.median = std::clamp(s.median, s.min, s.max);
    return s;
}

BenchReport run_bench(const BeliefNetwork& network, const BenchOptions& options) {
    BenchReport report;
    const JunctionTree whole_tree = build_junction_tree(network);
    const std::size_t whole_clique = max_clique_states(whole_tree);

    for (std::size_t i = 0; i < options.cases; ++i) {
        BenchCase c;
        c.index = i;
        c.seed = options.seed + i;
        c.evidence = sample_evidence(network, options.evidence, c.seed);

        Query everything{{}, c.evidence};
        for (NodeId v = 0; v < network.size(); ++v) {
            if (!c.evidence.contains(v)) everything.targets.insert(v);
        }
        auto start = Clock::now();
        InferenceResult whole = infer(network, everything);
        c.runs[0] = {seconds_since(start), whole_clique, 1};
        for (const auto& [v, s] : c.evidence) {
            whole.posteriors[v].assign(network.cardinality(v), 0.0);
            whole.posteriors[v][s] = 1.0;
        }

        for (std::size_t k = 1; k < kBenchConfigs.size(); ++k) {
            DecompositionOptions opts;
            opts.nuisance = kBenchConfigs[k] == BenchConfig::DecNuisance;
            start = Clock::now();
            const DecompositionResult dec = decompose_update(network, c.evidence, opts);
            const double elapsed = seconds_since(start);
            std::size_t biggest = 0;
            for (const auto& step : dec.steps) biggest = std::max(biggest, step.max_clique_states);
            c.runs[k] = {elapsed, biggest, dec.steps.size()};
            const double err = max_deviation(network, whole.posteriors, dec.posteriors);
            c.max_error = std::max(c.max_error, err);
            if (!(err <= options.tolerance)) {
                throw BenchMismatch(c.seed, "case seed " + std::to_string(c.seed) + ": " +
                                                config_label(kBenchConfigs[k]) + " deviates from whole-network " +
                                                "posteriors by " + std::to_string(err));
            }
        }
        report.cases.push_back(std::move(c));
    }
    for (std::size_t k = 0; k < kBenchConfigs.size(); ++k) {
        std::vector<double> times;
        for (const auto& c : report.cases) times.push_back(c.runs[k].seconds);
        report.summaries[k] = summarize(std::move(times));
    }
    return report;
}

void print_summary(std::ostream& out, const BenchReport& report) {
    const int w = 14;
    out << "n = " << report.cases.size() << '\n';
    out << std::left << std::setw(8) << "";
    for (BenchConfig c : kBenchConfigs) out << std::right << std::setw(w) << config_label(c);
    out << '\n';
    struct Row {
        const char* label;
        std::size_t width;  // visible characters; the Greek labels are two bytes
        double Summary::*field;
    };
    const std::array<Row, 5> rows = {{{"\u03bc", 1, &Summary::mean},
                                      {"\u03c3", 1, &Summary::stddev},
                                      {"Min", 3, &Summary::min},
                                      {"Median", 6, &Summary::median},
                                      {"Max", 3, &Summary::max}}};
    for (const auto& [label, width, field] : rows) {
        out << label << std::string(8 - width, ' ');
        for (const Summary& s : report.summaries) out << std::right << std::setw(w) << fixed(s.*field, 3);
        out << '\n';
    }
    out << "\nmax clique states per case\n";
    out << std::left << std::setw(8) << "case" << std::right << std::setw(w) << "seed";
    for (BenchConfig c : kBenchConfigs) out << std::setw(w) << config_label(c);
    out << std::setw(w) << "max |err|" << '\n';
    for (const auto& c : report.cases) {
        out << std::left << std::setw(8) << c.index << std::right << std::setw(w) << c.seed;
        for (const auto& r : c.runs) out << std::setw(w) << r.max_clique_states;
        std::ostringstream err;
        err << std::scientific << std::setprecision(2) << c.max_error;
        out << std::setw(w) << err.str() << '\n';
    }
}

void write_csv(std::ostream& out, const BenchReport& report) {
    out << "case,seed,config,seconds,max_clique_states,steps\n";
    for (const auto& c : report.cases) {
        for (std::size_t k = 0; k < kBenchConfigs.size(); ++k) {
            out << c.index << ',' << c.seed << ',' << config_key(kBenchConfigs[k]) << ','
                << fixed(c.runs[k].seconds, 6) << ',' << c.runs[k].max_clique_states << ',' << c.runs[k].steps
                << '\n';
        }
    }
}

}  // namespace relnet
