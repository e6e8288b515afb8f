#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "plastigen/experiment.hpp"

using namespace plastigen;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_runtime = 1;

std::uint64_t default_seed() {
    const char* env = std::getenv("PLASTIGEN_SEED");
    if (!env || !*env) return 1;
    std::uint64_t seed = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("PLASTIGEN_SEED must be a non-negative integer, got '" + std::string(text) + "'");
    return seed;
}

struct RunArgs {
    std::string grammar;
    std::string strategy;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> generations, population, trials;
    std::string out = "run.csv";
};

int cmd_run(const RunArgs& a) {
    EvoConfig cfg;
    try {
        cfg.strategy = parse_strategy(a.strategy);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cfg.grammar = a.grammar;
    cfg.seed = a.seed ? *a.seed : default_seed();
    if (a.generations) cfg.generations = *a.generations;
    if (a.population) cfg.population_size = *a.population;
    if (a.trials) cfg.learning_trials = *a.trials;

    Grammar grammar;
    try {
        grammar = load_grammar(resolve_grammar_path(a.grammar));
    } catch (const GrammarError& e) {
        throw ConfigError(e.what());
    }
    cfg.validate(grammar);

    std::ofstream csv(a.out, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + a.out);
    const std::string header = "generation,best_fitness\n";
    std::cout << header;
    csv << header;
    const RunResult result = run(cfg, grammar, [&](const Population& pop) {
        const std::string row = std::to_string(pop.generation) + "," + format_number(best_fitness(pop)) + "\n";
        std::cout << row << std::flush;
        csv << row;
    });
    if (!csv) throw std::runtime_error("failed writing " + a.out);
    std::cerr << (result.success ? "target found in generation " + std::to_string(*result.success_generation)
                                 : std::string("target not found"))
              << "; " << result.trials << " learning trials\n";
    return 0;
}

int cmd_sweep(const std::string& config, const std::optional<std::string>& out, std::optional<std::size_t> jobs) {
    ExperimentSpec spec = load_experiment_config(config);
    if (out) spec.output_dir = *out;
    if (jobs) spec.jobs = *jobs;
    spec.validate();
    const auto results = run_experiment(spec);
    for (const auto& r : results)
        std::cout << r.summary.treatment << ": " << r.summary.successes << "/" << r.summary.replications
                  << " successes, mean length " << format_number(r.summary.lengths.mean) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grammatical evolution with plastic phenomes and lifetime learning"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run one treatment with one seed");
    run_cmd->add_option("--grammar", run_args.grammar, "BNF grammar file")->required();
    run_cmd->add_option("--strategy", run_args.strategy, "Learning strategy")->required();
    run_cmd->add_option("--seed", run_args.seed, "Random seed (default: $PLASTIGEN_SEED or 1)");
    run_cmd->add_option("--generations", run_args.generations, "Generations after generation 0");
    run_cmd->add_option("--population", run_args.population, "Population size");
    run_cmd->add_option("--trials", run_args.trials, "Learning trials per individual");
    run_cmd->add_option("--out", run_args.out, "CSV of per-generation best fitness")->capture_default_str();

    std::string config;
    std::optional<std::string> sweep_out;
    std::optional<std::size_t> jobs;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run every treatment of an experiment config");
    sweep_cmd->add_option("--config", config, "Experiment config file")->required();
    sweep_cmd->add_option("--out", sweep_out, "Output directory (overrides output_dir)");
    sweep_cmd->add_option("--jobs", jobs, "Worker threads for replications");

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Rebuild summary.csv and figure tables from raw CSVs");
    report_cmd->add_option("--in", report_dir, "Directory written by sweep")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*run_cmd) return cmd_run(run_args);
        if (*sweep_cmd) return cmd_sweep(config, sweep_out, jobs);
        if (*report_cmd) {
            write_report(report_dir);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}
