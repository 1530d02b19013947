#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "relnet/network.hpp"

namespace relnet {

enum class BenchConfig { Whole, DecNuisance, Dec };

inline constexpr std::array<BenchConfig, 3> kBenchConfigs = {BenchConfig::Whole, BenchConfig::DecNuisance,
                                                             BenchConfig::Dec};

/// Column heading used in the summary table ("Whole netw.", "Dec+NuisRem", "Dec").
std::string config_label(BenchConfig config);
/// Short name used in CSV output ("whole", "dec_nuis", "dec").
std::string config_key(BenchConfig config);

struct BenchOptions {
    std::size_t cases = 50;
    std::size_t evidence = 10;
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
};

struct CaseRun {
    double seconds = 0.0;
    std::size_t max_clique_states = 0;
    std::size_t steps = 0;
};

struct BenchCase {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    Assignment evidence;
    std::array<CaseRun, 3> runs;
    /// Largest deviation of either decomposition from the whole-network posteriors.
    double max_error = 0.0;
};

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 for a single case
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

Summary summarize(std::vector<double> values);

struct BenchReport {
    std::vector<BenchCase> cases;
    std::array<Summary, 3> summaries;
};

/// A case whose configurations disagree; carries the offending case seed.
class BenchMismatch : public std::runtime_error {
public:
    BenchMismatch(std::uint64_t seed, const std::string& what) : std::runtime_error(what), seed_(seed) {}
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

/// Case i observes `evidence` random leaves sampled with seed `seed + i`, then
/// times whole-network inference and both decompositions over every node.
/// Only the inference calls are timed. Throws BenchMismatch as soon as a
/// decomposition deviates from the whole-network answer by more than the tolerance.
BenchReport run_bench(const BeliefNetwork& network, const BenchOptions& options);

/// Table with rows μ, σ, Min, Median, Max (seconds, 3 decimals) and one column
/// per configuration, then per-case max clique state counts.
void print_summary(std::ostream& out, const BenchReport& report);

/// One row per case and configuration.
void write_csv(std::ostream& out, const BenchReport& report);

}  // namespace relnet
