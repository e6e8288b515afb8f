#include "plastigen/evolution.hpp"

#include <algorithm>
#include <numeric>

namespace plastigen {

std::string_view to_string(BoardPolicy p) {
    return p == BoardPolicy::run_best ? "run_best" : "generation_best";
}

BoardPolicy parse_board_policy(std::string_view name) {
    if (name == "run_best") return BoardPolicy::run_best;
    if (name == "generation_best") return BoardPolicy::generation_best;
    throw ConfigError("unknown social_board policy '" + std::string(name) + "'");
}

std::string_view to_string(SocialIpl p) {
    return p == SocialIpl::lifetime ? "lifetime" : "frozen";
}

SocialIpl parse_social_ipl(std::string_view name) {
    if (name == "lifetime") return SocialIpl::lifetime;
    if (name == "frozen") return SocialIpl::frozen;
    throw ConfigError("unknown social_ipl policy '" + std::string(name) + "'");
}

namespace {

enum : std::uint64_t { stream_init = 1, stream_variation = 2, stream_evaluation = 3 };

bool grammar_has(const Grammar& g, SymbolKind kind) {
    for (const auto& r : g.rules())
        for (const auto& p : r.productions)
            for (const auto& s : p)
                if (s.kind == kind) return true;
    return false;
}

}  // namespace

LearningParams EvoConfig::learning_params() const {
    LearningParams p;
    p.fitness.target_length = target_length;
    p.fitness.max_trials = learning_trials;
    p.phenotype_cap = phenotype_cap;
    p.tabu_retries = tabu_retries;
    p.social_ipl = social_ipl;
    return p;
}

void EvoConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(population_size, "population_size");
    positive(generations, "generations");
    positive(tournament_size, "tournament_size");
    positive(max_init_depth, "max_init_depth");
    positive(max_depth, "max_depth");
    positive(learning_trials, "learning_trials");
    positive(target_length, "target_length");
    positive(phenotype_cap, "phenotype_cap");
    if (elites > population_size) throw ConfigError("elites must not exceed population_size");
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
        throw ConfigError("crossover_probability must lie in [0, 1]");
    if (max_init_depth > max_depth) throw ConfigError("max_init_depth must not exceed max_depth");
}

void EvoConfig::validate(const Grammar& g) const {
    validate();
    const bool content = grammar_has(g, SymbolKind::plastic_content);
    const bool structural = grammar_has(g, SymbolKind::plastic_structural);
    const auto name = std::string(to_string(strategy));
    switch (strategy) {
        case Strategy::nolearning:
        case Strategy::rollouts:
            if (content || structural)
                throw ConfigError(name + " needs a grammar without plastic symbols");
            break;
        case Strategy::asocial:
            if (structural) throw ConfigError("asocial cannot resolve '~'; use plastic_expansion");
            break;
        case Strategy::social:
            if (!structural) throw ConfigError("social needs a grammar with structural plastic symbols '~'");
            break;
        case Strategy::plastic_expansion:
        case Strategy::tabulist:
            break;
    }
    if (g.min_depth(g.start()) > max_init_depth)
        throw ConfigError("grammar needs initialisation depth " + std::to_string(g.min_depth(g.start())));
}

std::size_t tournament_select(const Population& pop, std::size_t tournament_size, Rng& rng) {
    const auto& inds = pop.individuals;
    if (inds.empty()) throw UnevaluatedPopulation("tournament on an empty population");
    std::size_t best = 0;
    std::size_t ties = 0;
    for (std::size_t k = 0; k < tournament_size; ++k) {
        const auto i = rng.below(inds.size());
        if (!inds[i].fitness) throw UnevaluatedPopulation("tournament over unevaluated individual");
        if (k == 0 || *inds[i].fitness < *inds[best].fitness) {
            best = i;
            ties = 1;
        } else if (*inds[i].fitness == *inds[best].fitness) {
            // reservoir choice keeps every tied entrant equally likely
            if (rng.below(++ties) == 0) best = i;
        }
    }
    return best;
}

std::vector<std::size_t> elite_indices(const Population& pop, std::size_t count) {
    std::vector<std::size_t> order(pop.individuals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    count = std::min(count, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double fa = pop.individuals[a].fitness.value();
                          const double fb = pop.individuals[b].fitness.value();
                          return fa != fb ? fa < fb : a < b;
                      });
    order.resize(count);
    return order;
}

double best_fitness(const Population& pop) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ind : pop.individuals) {
        if (!ind.fitness) throw UnevaluatedPopulation("best_fitness over unevaluated individual");
        best = std::min(best, *ind.fitness);
    }
    return best;
}

Engine::Engine(const EvoConfig& cfg, const Grammar& grammar)
    : cfg_(cfg), grammar_(grammar), params_(cfg.learning_params()) {
    cfg_.validate(grammar_);
    tabu_.retry_limit = params_.tabu_retries;
}

Individual Engine::make_individual(Genome genome) const {
    Individual ind;
    ind.map_outcome = map(genome, grammar_, cfg_.max_depth);
    ind.genome = std::move(genome);
    return ind;
}

void Engine::evaluate_one(Individual& ind, Rng& rng, const SocialBoard& board) {
    if (!ind.map_outcome.ok()) {
        ind.trial_record.reset();
        ind.fitness = params_.fitness.worst();
        return;
    }
    auto rec = evaluate(cfg_.strategy, ind.map_outcome.phenome(), params_, rng, board, tabu_);
    ind.fitness = fitness_from_trials(rec.trials_taken, params_.fitness);
    trials_run_ += rec.expressed_lengths.total();
    lengths_.merge(rec.expressed_lengths);
    max_lengths_.add(rec.max_expressed_length);
    if (rec.success() && !success_generation_) success_generation_ = pop_.generation;
    ind.trial_record = std::move(rec);
}

void Engine::evaluate_all(std::size_t first) {
    // Generation 0 learns without social information; the board still
    // collects every result so it is ready for generation 1.
    const SocialBoard blank;
    const bool live_board = pop_.generation > 0;
    for (std::size_t i = first; i < pop_.individuals.size(); ++i) {
        auto& ind = pop_.individuals[i];
        Rng rng(derive_seed(cfg_.seed, stream_evaluation, pop_.generation, i));
        evaluate_one(ind, rng, live_board ? board_ : blank);
        if (ind.trial_record && (cfg_.social_board == BoardPolicy::run_best || !live_board))
            board_ = board_update(board_, *ind.fitness, ind.trial_record->max_expressed_length);
    }
}

const Population& Engine::initialize() {
    pop_ = Population{};
    pop_.individuals.reserve(cfg_.population_size);
    const auto deepest = cfg_.max_init_depth;
    const auto shallowest = cfg_.ramped_init ? grammar_.min_depth(grammar_.start()) : deepest;
    const auto ramp = deepest - shallowest + 1;
    for (std::size_t i = 0; i < cfg_.population_size; ++i) {
        const auto depth = shallowest + i * ramp / cfg_.population_size;
        Rng rng(derive_seed(cfg_.seed, stream_init, 0, i));
        pop_.individuals.push_back(make_individual(pigrow_init(grammar_, depth, rng)));
    }
    evaluate_all(0);
    return pop_;
}

const Population& Engine::step_generation() {
    const auto& parents = pop_;
    Rng rng(derive_seed(cfg_.seed, stream_variation, parents.generation + 1));

    Population next;
    next.generation = parents.generation + 1;
    next.individuals.reserve(cfg_.population_size);
    for (auto i : elite_indices(parents, cfg_.elites)) next.individuals.push_back(parents.individuals[i]);
    const std::size_t first_child = next.individuals.size();

    auto vary = [&](Genome child) {
        // map first so the mutation lands inside the child's own used region
        (void)map(child, grammar_, cfg_.max_depth);
        return make_individual(mutate_int(child, rng));
    };
    while (next.individuals.size() < cfg_.population_size) {
        const auto& a = parents.individuals[tournament_select(parents, cfg_.tournament_size, rng)].genome;
        const auto& b = parents.individuals[tournament_select(parents, cfg_.tournament_size, rng)].genome;
        Genome c1, c2;
        if (rng.chance(cfg_.crossover_probability)) {
            std::tie(c1, c2) = crossover_variable_onepoint(a, b, rng);
        } else {
            c1 = a;
            c2 = b;
        }
        next.individuals.push_back(vary(std::move(c1)));
        if (next.individuals.size() < cfg_.population_size) next.individuals.push_back(vary(std::move(c2)));
    }

    if (cfg_.social_board == BoardPolicy::generation_best) {
        // the parents' best, ties broken at random, holds the board for this generation
        const double best = best_fitness(parents);
        std::vector<std::size_t> holders;
        for (std::size_t i = 0; i < parents.individuals.size(); ++i)
            if (*parents.individuals[i].fitness == best && parents.individuals[i].trial_record) holders.push_back(i);
        if (!holders.empty()) {
            const auto& holder = parents.individuals[holders[rng.below(holders.size())]];
            board_ = {best, holder.trial_record->max_expressed_length, true};
        }
    }
    pop_ = std::move(next);
    evaluate_all(first_child);
    return pop_;
}

std::vector<double> RunResult::padded_best_fitness(std::size_t generations) const {
    std::vector<double> out(best_fitness.begin(), best_fitness.end());
    if (out.size() > generations + 1) out.resize(generations + 1);
    while (!out.empty() && out.size() < generations + 1) out.push_back(out.back());
    return out;
}

RunResult run(const EvoConfig& cfg, const Grammar& grammar, const GenerationObserver& observer) {
    Engine engine(cfg, grammar);
    RunResult result;
    auto record = [&](const Population& pop) {
        result.best_fitness.push_back(best_fitness(pop));
        if (observer) observer(pop);
    };
    record(engine.initialize());
    for (std::size_t g = 1; g <= cfg.generations; ++g) {
        if (cfg.stop_on_success && engine.success_generation()) break;
        record(engine.step_generation());
    }
    result.success = engine.success_generation().has_value();
    result.success_generation = engine.success_generation();
    result.final_population = engine.population();
    result.lengths = engine.lengths();
    result.max_lengths = engine.max_lengths();
    result.trials = engine.trials_run();
    return result;
}

}  // namespace plastigen
