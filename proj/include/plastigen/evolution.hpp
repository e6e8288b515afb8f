#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plastigen/grammar.hpp"
#include "plastigen/learning.hpp"
#include "plastigen/mapper.hpp"
#include "plastigen/random.hpp"

namespace plastigen {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Which individual the social board follows: the best seen in the run so far
/// (updated during evaluation) or the best of the previous generation.
enum class BoardPolicy { run_best, generation_best };

std::string_view to_string(BoardPolicy p);
BoardPolicy parse_board_policy(std::string_view name);
std::string_view to_string(SocialIpl p);
SocialIpl parse_social_ipl(std::string_view name);

/// Parameters of one evolutionary run. Defaults are the published settings.
struct EvoConfig {
    std::size_t population_size = 1000;
    std::size_t generations = 50;
    double crossover_probability = 0.9;
    std::size_t tournament_size = 2;
    std::size_t elites = 10;
    std::size_t max_init_depth = 10;
    std::size_t max_depth = 50;
    std::size_t learning_trials = 1000;
    Strategy strategy = Strategy::nolearning;
    std::string grammar;
    std::uint64_t seed = 0;

    std::size_t target_length = 20;
    std::size_t phenotype_cap = 100;
    std::size_t tabu_retries = 10;
    /// Finish the run at the end of the generation that first expresses the target.
    bool stop_on_success = true;
    /// Cycle generation-0 trees over the initialisation depths
    /// min_depth(start)..max_init_depth instead of growing all to the maximum.
    bool ramped_init = false;
    BoardPolicy social_board = BoardPolicy::run_best;
    SocialIpl social_ipl = SocialIpl::lifetime;

    LearningParams learning_params() const;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
    /// Also checks the strategy against the symbols the grammar can emit.
    void validate(const Grammar& g) const;
};

struct Individual {
    Genome genome;
    MapOutcome map_outcome;
    std::optional<TrialRecord> trial_record;
    std::optional<double> fitness;

    bool evaluated() const { return fitness.has_value(); }
};

struct Population {
    std::vector<Individual> individuals;
    std::size_t generation = 0;
};

class UnevaluatedPopulation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Size-k tournament with replacement; lowest fitness wins, ties uniformly.
std::size_t tournament_select(const Population& pop, std::size_t tournament_size, Rng& rng);

/// Indices of the `count` fittest individuals, ties to the lower index.
std::vector<std::size_t> elite_indices(const Population& pop, std::size_t count);

double best_fitness(const Population& pop);

/// Mutable state of one run between generations.
class Engine {
public:
    Engine(const EvoConfig& cfg, const Grammar& grammar);

    /// Builds and evaluates generation 0.
    const Population& initialize();
    /// Replaces the population with the next generation and evaluates it.
    const Population& step_generation();

    const Population& population() const { return pop_; }
    const SocialBoard& board() const { return board_; }
    /// Set once any evaluation has expressed the target.
    std::optional<std::size_t> success_generation() const { return success_generation_; }
    std::uint64_t trials_run() const { return trials_run_; }
    const LengthHistogram& lengths() const { return lengths_; }
    const LengthHistogram& max_lengths() const { return max_lengths_; }

private:
    Individual make_individual(Genome genome) const;
    void evaluate_all(std::size_t first);
    void evaluate_one(Individual& ind, Rng& rng, const SocialBoard& board);

    EvoConfig cfg_;
    const Grammar& grammar_;
    LearningParams params_;
    Population pop_;
    SocialBoard board_;
    TabuMemory tabu_;
    std::optional<std::size_t> success_generation_;
    std::uint64_t trials_run_ = 0;
    LengthHistogram lengths_;
    LengthHistogram max_lengths_;
};

struct RunResult {
    /// Best fitness of each executed generation (index = generation).
    std::vector<double> best_fitness;
    bool success = false;
    std::optional<std::size_t> success_generation;
    Population final_population;
    /// Every expressed phenotype length of every evaluation.
    LengthHistogram lengths;
    /// Per evaluation, the longest phenotype expressed.
    LengthHistogram max_lengths;
    std::uint64_t trials = 0;

    /// Best-fitness curve over generations 0..generations, carrying the last
    /// executed value forward after an early stop.
    std::vector<double> padded_best_fitness(std::size_t generations) const;
};

using GenerationObserver = std::function<void(const Population&)>;

/// Runs one seeded evolution. The observer sees every generation after it is
/// evaluated, generation 0 included.
RunResult run(const EvoConfig& cfg, const Grammar& grammar, const GenerationObserver& observer = {});

}  // namespace plastigen
