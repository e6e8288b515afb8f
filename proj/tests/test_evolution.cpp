#include <algorithm>
#include <map>

#include "doctest.h"
#include "plastigen/evolution.hpp"
#include "support.hpp"

using namespace plastigen;
using testing::shipped;

namespace {

Population with_fitness(const std::vector<double>& fitness) {
    Population pop;
    for (double f : fitness) {
        Individual ind;
        ind.genome.codons = {0};
        ind.fitness = f;
        pop.individuals.push_back(ind);
    }
    return pop;
}

EvoConfig small_config(Strategy strategy, std::uint64_t seed = 1) {
    EvoConfig cfg;
    cfg.population_size = 60;
    cfg.generations = 8;
    cfg.elites = 4;
    cfg.learning_trials = 40;
    cfg.strategy = strategy;
    cfg.seed = seed;
    return cfg;
}

bool same_individuals(const Population& a, const Population& b) {
    if (a.individuals.size() != b.individuals.size()) return false;
    for (std::size_t i = 0; i < a.individuals.size(); ++i)
        if (a.individuals[i].genome != b.individuals[i].genome || a.individuals[i].fitness != b.individuals[i].fitness)
            return false;
    return true;
}

}  // namespace

TEST_SUITE("evolution") {
    TEST_CASE("tournament with two fitness levels picks the better one 3/4 of the time") {
        const auto pop = with_fitness({1.0, 20.0});
        Rng rng(1);
        const int n = 80000;
        int better = 0;
        for (int i = 0; i < n; ++i) better += tournament_select(pop, 2, rng) == 0;
        CHECK(std::abs(better / double(n) - 0.75) < 4 * std::sqrt(0.75 * 0.25 / n));
    }

    TEST_CASE("tournament over three distinct fitnesses") {
        const auto pop = with_fitness({3.0, 1.0, 2.0});
        Rng rng(2);
        std::vector<long> counts(3, 0);
        const int n = 90000;
        for (int i = 0; i < n; ++i) ++counts[tournament_select(pop, 2, rng)];
        // enumeration of the 9 ordered draws: best 5/9, middle 3/9, worst 1/9
        CHECK(std::abs(counts[1] / double(n) - 5.0 / 9) < 0.01);
        CHECK(std::abs(counts[2] / double(n) - 3.0 / 9) < 0.01);
        CHECK(std::abs(counts[0] / double(n) - 1.0 / 9) < 0.01);
    }

    TEST_CASE("tournament among equals is uniform") {
        const auto pop = with_fitness(std::vector<double>(4, 7.0));
        Rng rng(3);
        std::vector<long> counts(4, 0);
        for (int i = 0; i < 40000; ++i) ++counts[tournament_select(pop, 2, rng)];
        CHECK(testing::chi_square_uniform(counts) < testing::chi_square_critical_999(3));
    }

    TEST_CASE("tournament requires evaluated individuals") {
        Rng rng(4);
        Population pop = with_fitness({1.0});
        pop.individuals[0].fitness.reset();
        CHECK_THROWS_AS(tournament_select(pop, 2, rng), UnevaluatedPopulation);
        CHECK_THROWS_AS(tournament_select(Population{}, 2, rng), UnevaluatedPopulation);
    }

    TEST_CASE("elites are the fittest with ties to the lower index") {
        const auto pop = with_fitness({5.0, 1.0, 3.0, 1.0, 3.0, 20.0});
        CHECK(elite_indices(pop, 4) == std::vector<std::size_t>{1, 3, 2, 4});
        CHECK(elite_indices(pop, 10).size() == 6);
        CHECK(best_fitness(pop) == 1.0);
    }

    TEST_CASE("configuration validation") {
        EvoConfig cfg;
        CHECK_NOTHROW(cfg.validate());
        cfg.elites = cfg.population_size + 1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = EvoConfig{};
        cfg.generations = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = EvoConfig{};
        cfg.crossover_probability = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);

        cfg = EvoConfig{};
        cfg.strategy = Strategy::social;
        CHECK_THROWS_AS(cfg.validate(shipped("fixed_nolearning.bnf")), ConfigError);
        CHECK_NOTHROW(cfg.validate(shipped("variable_expansion.bnf")));
        cfg.strategy = Strategy::asocial;
        CHECK_THROWS_AS(cfg.validate(shipped("variable_expansion.bnf")), ConfigError);
        CHECK_NOTHROW(cfg.validate(shipped("fixed_plastic.bnf")));
        cfg.strategy = Strategy::nolearning;
        CHECK_THROWS_AS(cfg.validate(shipped("fixed_plastic.bnf")), ConfigError);
        cfg.strategy = Strategy::rollouts;
        CHECK_NOTHROW(cfg.validate(shipped("variable_nolearning.bnf")));

        cfg.max_init_depth = 2;
        CHECK_THROWS_AS(cfg.validate(shipped("fixed_nolearning.bnf")), ConfigError);
    }

    TEST_CASE("policy names") {
        CHECK(parse_board_policy("run_best") == BoardPolicy::run_best);
        CHECK(parse_board_policy("generation_best") == BoardPolicy::generation_best);
        CHECK(parse_social_ipl(to_string(SocialIpl::frozen)) == SocialIpl::frozen);
        CHECK_THROWS_AS(parse_board_policy("median"), ConfigError);
    }

    TEST_CASE("generations keep their size, their elites and a monotone best") {
        const auto g = shipped("variable_plastic.bnf");
        auto cfg = small_config(Strategy::asocial);
        Engine engine(cfg, g);
        const Population* pop = &engine.initialize();
        CHECK(pop->individuals.size() == cfg.population_size);
        for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
            const Population parents = *pop;
            const auto elites = elite_indices(parents, cfg.elites);
            pop = &engine.step_generation();
            CHECK(pop->generation == gen);
            REQUIRE(pop->individuals.size() == cfg.population_size);
            CHECK(best_fitness(*pop) <= best_fitness(parents));
            for (std::size_t e = 0; e < elites.size(); ++e) {
                CHECK(pop->individuals[e].genome == parents.individuals[elites[e]].genome);
                CHECK(pop->individuals[e].fitness == parents.individuals[elites[e]].fitness);
            }
            for (const auto& ind : pop->individuals) {
                REQUIRE(ind.fitness);
                CHECK(*ind.fitness >= 1.0);
                CHECK(*ind.fitness <= 20.0);
                CHECK(ind.trial_record.has_value() == ind.map_outcome.ok());
                if (!ind.map_outcome.ok()) CHECK(*ind.fitness == 20.0);
            }
        }
    }

    TEST_CASE("learning leaves genomes and phenomes untouched") {
        const auto g = shipped("variable_expansion.bnf");
        for (auto s : {Strategy::plastic_expansion, Strategy::tabulist, Strategy::social}) {
            auto cfg = small_config(s);
            Engine engine(cfg, g);
            engine.initialize();
            for (int gen = 0; gen < 3; ++gen) {
                for (const auto& ind : engine.population().individuals) {
                    Genome copy = ind.genome;
                    const auto again = map(copy, g, cfg.max_depth);
                    REQUIRE(again.ok() == ind.map_outcome.ok());
                    if (again.ok()) CHECK(again.phenome() == ind.map_outcome.phenome());
                    CHECK(copy.used_length == ind.genome.used_length);
                }
                engine.step_generation();
            }
        }
    }

    TEST_CASE("trial accounting") {
        const auto g = shipped("variable_expansion.bnf");
        auto cfg = small_config(Strategy::plastic_expansion);
        Engine engine(cfg, g);
        engine.initialize();
        CHECK(engine.trials_run() <= cfg.population_size * cfg.learning_trials);
        auto before = engine.trials_run();
        engine.step_generation();
        CHECK(engine.trials_run() - before <= (cfg.population_size - cfg.elites) * cfg.learning_trials);
        CHECK(engine.lengths().total() == engine.trials_run());
    }

    TEST_CASE("runs are reproducible from the seed") {
        for (auto s : {Strategy::rollouts, Strategy::tabulist, Strategy::social}) {
            const auto g = shipped(s == Strategy::rollouts ? "fixed_nolearning.bnf" : "variable_expansion.bnf");
            const auto cfg = small_config(s, 42);
            const auto a = run(cfg, g);
            const auto b = run(cfg, g);
            CHECK(a.best_fitness == b.best_fitness);
            CHECK(a.lengths == b.lengths);
            CHECK(a.trials == b.trials);
            CHECK(same_individuals(a.final_population, b.final_population));
            const auto c = run(small_config(s, 43), g);
            CHECK_FALSE(same_individuals(a.final_population, c.final_population));
        }
    }

    TEST_CASE("early stop and padding") {
        const auto g = shipped("fixed_plastic.bnf");
        auto cfg = small_config(Strategy::asocial);
        cfg.population_size = 200;
        cfg.learning_trials = 1000;
        cfg.generations = 30;
        const auto result = run(cfg, g);
        REQUIRE(result.success);
        CHECK(result.best_fitness.size() == *result.success_generation + 1);
        const auto padded = result.padded_best_fitness(cfg.generations);
        CHECK(padded.size() == cfg.generations + 1);
        CHECK(padded.back() == result.best_fitness.back());
        CHECK(std::is_sorted(padded.rbegin(), padded.rend()));

        cfg.stop_on_success = false;
        const auto full = run(cfg, g);
        CHECK(full.best_fitness.size() == cfg.generations + 1);
        CHECK(full.success_generation == result.success_generation);
        CHECK(std::equal(result.best_fitness.begin(), result.best_fitness.end(), full.best_fitness.begin()));
    }

    TEST_CASE("observer sees every generation") {
        const auto g = shipped("fixed_nolearning.bnf");
        auto cfg = small_config(Strategy::nolearning);
        std::vector<std::size_t> seen;
        const auto result = run(cfg, g, [&](const Population& p) { seen.push_back(p.generation); });
        CHECK(seen.size() == result.best_fitness.size());
        for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
    }

    TEST_CASE("social board follows the run's best evaluation") {
        const auto g = shipped("variable_expansion.bnf");
        auto cfg = small_config(Strategy::social);
        Engine engine(cfg, g);
        engine.initialize();
        CHECK(engine.board().initialized);
        const double best0 = engine.board().best_fitness;
        CHECK(best0 == best_fitness(engine.population()));
        engine.step_generation();
        CHECK(engine.board().best_fitness <= best0);
        CHECK(engine.board().mpl >= 1);

        cfg.social_board = BoardPolicy::generation_best;
        cfg.social_ipl = SocialIpl::frozen;
        Engine other(cfg, g);
        other.initialize();
        const auto prev = best_fitness(other.population());
        other.step_generation();
        CHECK(other.board().best_fitness == prev);
    }

    TEST_CASE("ramped initialisation spans the depth range") {
        const auto g = shipped("variable_nolearning.bnf");
        auto cfg = small_config(Strategy::nolearning);
        cfg.ramped_init = true;
        Engine engine(cfg, g);
        std::map<std::size_t, int> depths;
        for (const auto& ind : engine.initialize().individuals) ++depths[ind.map_outcome.phenome().depth];
        CHECK(depths.begin()->first == g.min_depth(g.start()));
        CHECK(depths.rbegin()->first == cfg.max_init_depth);
    }
}
