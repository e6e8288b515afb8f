#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plastigen/evolution.hpp"

namespace plastigen {

class EmptyPool : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Treatment {
    std::string name;
    std::string grammar;  // path to a BNF file
    Strategy strategy = Strategy::nolearning;
};

/// The nine strategy/grammar pairings of the published comparison.
std::vector<Treatment> standard_treatments();

struct ExperimentSpec {
    std::vector<Treatment> treatments;
    std::size_t replications = 30;
    std::uint64_t base_seed = 1;
    std::string output_dir = "results";
    /// Shared evolution settings; strategy, grammar and seed are set per run.
    EvoConfig evo;
    /// Worker threads for replications; results never depend on it.
    std::size_t jobs = 1;

    void validate() const;
};

/// Relative frequencies of phenome symbols pooled over a population.
struct SymbolFrequencies {
    double one = 0;
    double zero = 0;
    double content = 0;     // `?`
    double structural = 0;  // `~`
};

/// Pools the phenome symbols of every successfully mapped individual.
/// Throws EmptyPool when no individual mapped.
SymbolFrequencies symbol_frequencies(const Population& pop);

struct LengthStats {
    double mean = 0;
    double stddev = 0;
};

/// Mean and population standard deviation; throws EmptyPool when empty.
LengthStats length_stats(const LengthHistogram& lengths);

struct Interval {
    double low = 0;
    double high = 0;
};

/// Wilson score interval for a binomial proportion (95% by default).
Interval binomial_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct GenStats {
    std::size_t generation = 0;
    double mean_best_fitness = 0;
    SymbolFrequencies symbols;
    double length_mean = 0;
    double length_std = 0;
};

struct TreatmentSummary {
    std::string treatment;
    std::size_t replications = 0;
    std::size_t successes = 0;
    Interval ci;
    LengthStats lengths;
    LengthStats max_lengths;
};

/// Outcome of one replication, trimmed to what aggregation needs.
struct ReplicationRecord {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    bool success = false;
    std::optional<std::size_t> success_generation;
    std::uint64_t trials = 0;
    /// Padded to generations + 1 entries.
    std::vector<double> best_fitness;
    /// Per generation; padded like best_fitness. Generations with no mapped
    /// individual hold no value.
    std::vector<std::optional<SymbolFrequencies>> symbols;
    std::vector<LengthHistogram> generation_lengths;
    LengthHistogram lengths;
    LengthHistogram max_lengths;
};

struct TreatmentResult {
    Treatment treatment;
    /// `fixed` when the grammar derives a single length, else `variable`.
    std::string landscape;
    std::vector<ReplicationRecord> replications;
    std::vector<GenStats> generations;
    TreatmentSummary summary;
};

ReplicationRecord run_replication(const EvoConfig& cfg, const Grammar& grammar, std::size_t replication);

/// Runs every replication of one treatment with seeds base_seed + index.
TreatmentResult run_treatment(const ExperimentSpec& spec, const Treatment& treatment);

/// Runs all treatments and writes the CSV outputs into spec.output_dir.
std::vector<TreatmentResult> run_experiment(const ExperimentSpec& spec);

/// Writes raw per-replication tables for completed treatments.
void write_raw_outputs(const std::vector<TreatmentResult>& results, const std::filesystem::path& dir);

/// Rebuilds summary.csv and the fig7-fig10 plotting tables from the raw
/// tables in `dir`. Re-running over the same directory is byte-identical.
void write_report(const std::filesystem::path& dir);

/// Shortest decimal rendering with 6 significant digits.
std::string format_number(double value);

/// Resolves a grammar path against the working directory, then the shipped
/// grammar directory.
std::string resolve_grammar_path(const std::string& path);

/// Parses `key = value` lines. Keys are EvoConfig / ExperimentSpec field names;
/// `treatment = NAME GRAMMAR STRATEGY` may repeat. Without any treatment line
/// the published set is used.
ExperimentSpec parse_experiment_config(std::istream& in);
ExperimentSpec load_experiment_config(const std::string& path);

/// Applies one `key = value` setting to an EvoConfig; false for unknown keys.
bool apply_evo_setting(EvoConfig& cfg, const std::string& key, const std::string& value);

}  // namespace plastigen
