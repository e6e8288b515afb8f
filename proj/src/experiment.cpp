#include "plastigen/experiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#ifndef PLASTIGEN_GRAMMAR_DIR
#define PLASTIGEN_GRAMMAR_DIR "grammars"
#endif

namespace fs = std::filesystem;

namespace plastigen {

std::vector<Treatment> standard_treatments() {
    return {
        {"fixed-nolearning", "fixed_nolearning.bnf", Strategy::nolearning},
        {"fixed-rollouts", "fixed_nolearning.bnf", Strategy::rollouts},
        {"fixed-asocial", "fixed_plastic.bnf", Strategy::asocial},
        {"variable-nolearning", "variable_nolearning.bnf", Strategy::nolearning},
        {"variable-rollouts", "variable_nolearning.bnf", Strategy::rollouts},
        {"variable-asocial", "variable_plastic.bnf", Strategy::asocial},
        {"variable-plastic_expansion", "variable_expansion.bnf", Strategy::plastic_expansion},
        {"variable-tabulist", "variable_expansion.bnf", Strategy::tabulist},
        {"variable-social", "variable_expansion.bnf", Strategy::social},
    };
}

void ExperimentSpec::validate() const {
    if (treatments.empty()) throw ConfigError("experiment has no treatments");
    if (replications == 0) throw ConfigError("replications must be positive");
    if (jobs == 0) throw ConfigError("jobs must be positive");
    evo.validate();
    std::vector<std::string> names;
    for (const auto& t : treatments) {
        if (t.name.empty() ||
            !std::all_of(t.name.begin(), t.name.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
            }))
            throw ConfigError("treatment name '" + t.name + "' must use [A-Za-z0-9._-]");
        if (std::find(names.begin(), names.end(), t.name) != names.end())
            throw ConfigError("duplicate treatment name " + t.name);
        names.push_back(t.name);
        EvoConfig cfg = evo;
        cfg.strategy = t.strategy;
        cfg.grammar = t.grammar;
        try {
            cfg.validate(load_grammar(resolve_grammar_path(t.grammar)));
        } catch (const GrammarError& e) {
            throw ConfigError("treatment " + t.name + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("treatment " + t.name + ": " + e.what());
        }
    }
}

SymbolFrequencies symbol_frequencies(const Population& pop) {
    std::uint64_t one = 0, zero = 0, content = 0, structural = 0, total = 0;
    for (const auto& ind : pop.individuals) {
        if (!ind.map_outcome.ok()) continue;
        for (const auto& s : ind.map_outcome.phenome().symbols) {
            ++total;
            switch (s.kind) {
                case SymbolKind::plastic_content: ++content; break;
                case SymbolKind::plastic_structural: ++structural; break;
                default:
                    if (s.text == "1") ++one;
                    else if (s.text == "0") ++zero;
                    break;
            }
        }
    }
    if (total == 0) throw EmptyPool("no mapped phenome symbols to pool");
    const double n = static_cast<double>(total);
    return {static_cast<double>(one) / n, static_cast<double>(zero) / n, static_cast<double>(content) / n,
            static_cast<double>(structural) / n};
}

LengthStats length_stats(const LengthHistogram& lengths) {
    if (lengths.empty()) throw EmptyPool("no expressed phenotype lengths");
    return {lengths.mean(), lengths.stddev()};
}

Interval binomial_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

ReplicationRecord run_replication(const EvoConfig& cfg, const Grammar& grammar, std::size_t replication) {
    ReplicationRecord rec;
    rec.replication = replication;
    rec.seed = cfg.seed;
    auto observe = [&](const Population& pop) {
        try {
            rec.symbols.emplace_back(symbol_frequencies(pop));
        } catch (const EmptyPool&) {
            rec.symbols.emplace_back(std::nullopt);
        }
        LengthHistogram lengths;
        const std::size_t first = pop.generation == 0 ? 0 : std::min(cfg.elites, pop.individuals.size());
        for (std::size_t i = first; i < pop.individuals.size(); ++i)
            if (const auto& tr = pop.individuals[i].trial_record) lengths.merge(tr->expressed_lengths);
        rec.generation_lengths.push_back(std::move(lengths));
    };
    const RunResult result = run(cfg, grammar, observe);
    rec.success = result.success;
    rec.success_generation = result.success_generation;
    rec.trials = result.trials;
    rec.best_fitness = result.padded_best_fitness(cfg.generations);
    while (!rec.symbols.empty() && rec.symbols.size() < cfg.generations + 1) rec.symbols.push_back(rec.symbols.back());
    rec.lengths = result.lengths;
    rec.max_lengths = result.max_lengths;
    return rec;
}

namespace {

TreatmentSummary summarize(const std::string& name, std::size_t replications, std::size_t successes,
                           const LengthHistogram& lengths, const LengthHistogram& max_lengths) {
    TreatmentSummary s;
    s.treatment = name;
    s.replications = replications;
    s.successes = successes;
    s.ci = binomial_interval(successes, replications);
    if (!lengths.empty()) s.lengths = length_stats(lengths);
    if (!max_lengths.empty()) s.max_lengths = length_stats(max_lengths);
    return s;
}

std::vector<GenStats> aggregate_generations(const std::vector<ReplicationRecord>& reps, std::size_t generations) {
    std::vector<GenStats> out;
    for (std::size_t g = 0; g <= generations; ++g) {
        GenStats gs;
        gs.generation = g;
        double fitness = 0;
        std::size_t with_symbols = 0;
        LengthHistogram lengths;
        for (const auto& r : reps) {
            fitness += r.best_fitness.at(g);
            if (g < r.symbols.size() && r.symbols[g]) {
                const auto& f = *r.symbols[g];
                gs.symbols.one += f.one;
                gs.symbols.zero += f.zero;
                gs.symbols.content += f.content;
                gs.symbols.structural += f.structural;
                ++with_symbols;
            }
            if (g < r.generation_lengths.size()) lengths.merge(r.generation_lengths[g]);
        }
        gs.mean_best_fitness = fitness / static_cast<double>(reps.size());
        if (with_symbols > 0) {
            const double k = static_cast<double>(with_symbols);
            gs.symbols = {gs.symbols.one / k, gs.symbols.zero / k, gs.symbols.content / k, gs.symbols.structural / k};
        }
        if (!lengths.empty()) {
            gs.length_mean = lengths.mean();
            gs.length_std = lengths.stddev();
        }
        out.push_back(gs);
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Reads a CSV with a header row into rows of fields.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split_csv(line);
        if (row.size() != columns)
            throw std::runtime_error(path.string() + ": expected " + std::to_string(columns) + " fields in '" +
                                     line + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError("bad value '" + text + "' for " + what);
    return value;
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw ConfigError("bad value '" + text + "' for " + what);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("bad value '" + text + "' for " + what);
    }
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("bad value '" + text + "' for " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Series {
    std::string name;
    std::vector<std::pair<std::size_t, double>> points;
};

void write_long(const fs::path& path, const std::vector<Series>& series) {
    auto out = open_output(path);
    out << "series,x,y\n";
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) out << s.name << ',' << x << ',' << format_number(y) << '\n';
}

}  // namespace

TreatmentResult run_treatment(const ExperimentSpec& spec, const Treatment& treatment) {
    const Grammar grammar = load_grammar(resolve_grammar_path(treatment.grammar));
    TreatmentResult result;
    result.treatment = treatment;
    result.landscape = grammar.max_depth(grammar.start()) == unbounded_depth ? "variable" : "fixed";
    result.replications.resize(spec.replications);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < spec.replications;) {
            try {
                EvoConfig cfg = spec.evo;
                cfg.strategy = treatment.strategy;
                cfg.grammar = treatment.grammar;
                cfg.seed = spec.base_seed + r;
                result.replications[r] = run_replication(cfg, grammar, r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(spec.jobs, spec.replications);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    LengthHistogram lengths, max_lengths;
    std::size_t successes = 0;
    for (const auto& r : result.replications) {
        successes += r.success;
        lengths.merge(r.lengths);
        max_lengths.merge(r.max_lengths);
    }
    result.generations = aggregate_generations(result.replications, spec.evo.generations);
    result.summary = summarize(treatment.name, spec.replications, successes, lengths, max_lengths);
    return result;
}

std::vector<TreatmentResult> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<TreatmentResult> results;
    for (const auto& t : spec.treatments) results.push_back(run_treatment(spec, t));
    const fs::path dir(spec.output_dir);
    fs::create_directories(dir);
    write_raw_outputs(results, dir);
    write_report(dir);
    return results;
}

void write_raw_outputs(const std::vector<TreatmentResult>& results, const fs::path& dir) {
    auto treatments = open_output(dir / "treatments.csv");
    auto runs = open_output(dir / "runs.csv");
    auto fitness = open_output(dir / "fitness_by_generation.csv");
    auto symbols = open_output(dir / "symbols_by_generation.csv");
    auto lengths = open_output(dir / "lengths.csv");
    auto max_lengths = open_output(dir / "max_lengths.csv");
    treatments << "treatment,grammar,strategy,landscape\n";
    runs << "treatment,replication,seed,success,success_generation,trials\n";
    fitness << "treatment,replication,generation,best_fitness\n";
    symbols << "treatment,generation,sym_1,sym_0,sym_q,sym_tilde\n";
    lengths << "treatment,length,count\n";
    max_lengths << "treatment,length,count\n";

    auto dump = [](std::ofstream& out, const std::string& name, const LengthHistogram& h) {
        for (std::size_t len = 0; len < h.counts().size(); ++len)
            if (h.counts()[len] != 0) out << name << ',' << len << ',' << h.counts()[len] << '\n';
    };
    for (const auto& tr : results) {
        const auto& name = tr.treatment.name;
        treatments << name << ',' << fs::path(tr.treatment.grammar).filename().string() << ','
                   << to_string(tr.treatment.strategy) << ',' << tr.landscape << '\n';
        LengthHistogram pooled, pooled_max;
        for (const auto& r : tr.replications) {
            runs << name << ',' << r.replication << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
                 << (r.success_generation ? std::to_string(*r.success_generation) : std::string{}) << ','
                 << r.trials << '\n';
            for (std::size_t g = 0; g < r.best_fitness.size(); ++g)
                fitness << name << ',' << r.replication << ',' << g << ',' << format_number(r.best_fitness[g]) << '\n';
            pooled.merge(r.lengths);
            pooled_max.merge(r.max_lengths);
        }
        for (const auto& gs : tr.generations) {
            const bool any = std::any_of(tr.replications.begin(), tr.replications.end(), [&](const auto& r) {
                return gs.generation < r.symbols.size() && r.symbols[gs.generation].has_value();
            });
            if (!any) continue;
            symbols << name << ',' << gs.generation << ',' << format_number(gs.symbols.one) << ','
                    << format_number(gs.symbols.zero) << ',' << format_number(gs.symbols.content) << ','
                    << format_number(gs.symbols.structural) << '\n';
        }
        dump(lengths, name, pooled);
        dump(max_lengths, name, pooled_max);
    }
}

void write_report(const fs::path& dir) {
    struct Info {
        std::string strategy;
        std::string landscape;
        std::size_t replications = 0;
        std::size_t successes = 0;
        LengthHistogram lengths, max_lengths;
        std::map<std::size_t, std::pair<double, std::size_t>> fitness;  // generation -> (sum, n)
        std::vector<std::array<double, 4>> symbols;
        std::vector<std::size_t> symbol_generations;
    };
    std::vector<std::string> order;
    std::map<std::string, Info> info;
    auto lookup = [&](const std::string& name, const fs::path& file) -> Info& {
        const auto it = info.find(name);
        if (it == info.end()) throw std::runtime_error(file.string() + ": unknown treatment " + name);
        return it->second;
    };

    for (const auto& row : read_csv(dir / "treatments.csv", 4)) {
        if (info.contains(row[0])) throw std::runtime_error("treatments.csv: duplicate treatment " + row[0]);
        order.push_back(row[0]);
        Info entry;
        entry.strategy = row[2];
        entry.landscape = row[3];
        info[row[0]] = std::move(entry);
    }
    for (const auto& row : read_csv(dir / "runs.csv", 6)) {
        auto& t = lookup(row[0], "runs.csv");
        ++t.replications;
        t.successes += row[3] == "1";
    }
    for (const auto& row : read_csv(dir / "lengths.csv", 3))
        lookup(row[0], "lengths.csv").lengths.add(parse_number<std::size_t>(row[1], "length"),
                                                  parse_number<std::uint64_t>(row[2], "count"));
    for (const auto& row : read_csv(dir / "max_lengths.csv", 3))
        lookup(row[0], "max_lengths.csv").max_lengths.add(parse_number<std::size_t>(row[1], "length"),
                                                          parse_number<std::uint64_t>(row[2], "count"));
    for (const auto& row : read_csv(dir / "fitness_by_generation.csv", 4)) {
        auto& cell = lookup(row[0], "fitness_by_generation.csv").fitness[parse_number<std::size_t>(row[2], "generation")];
        cell.first += parse_real(row[3], "best_fitness");
        ++cell.second;
    }
    for (const auto& row : read_csv(dir / "symbols_by_generation.csv", 6)) {
        auto& t = lookup(row[0], "symbols_by_generation.csv");
        t.symbol_generations.push_back(parse_number<std::size_t>(row[1], "generation"));
        t.symbols.push_back({parse_real(row[2], "sym_1"), parse_real(row[3], "sym_0"), parse_real(row[4], "sym_q"),
                             parse_real(row[5], "sym_tilde")});
    }

    {
        auto out = open_output(dir / "summary.csv");
        out << "treatment,replications,successes,ci_low,ci_high,len_mean,len_std,maxlen_mean,maxlen_std\n";
        for (const auto& name : order) {
            const auto& t = info.at(name);
            const auto s = summarize(name, t.replications, t.successes, t.lengths, t.max_lengths);
            out << name << ',' << s.replications << ',' << s.successes << ',' << format_number(s.ci.low) << ','
                << format_number(s.ci.high) << ',' << format_number(s.lengths.mean) << ','
                << format_number(s.lengths.stddev) << ',' << format_number(s.max_lengths.mean) << ','
                << format_number(s.max_lengths.stddev) << '\n';
        }
    }

    auto fitness_series = [&](auto&& keep) {
        std::vector<Series> out;
        for (const auto& name : order) {
            const auto& t = info.at(name);
            if (!keep(t)) continue;
            Series s{name, {}};
            for (const auto& [g, cell] : t.fitness) s.points.emplace_back(g, cell.first / static_cast<double>(cell.second));
            out.push_back(std::move(s));
        }
        return out;
    };
    const auto is_fixed = [](const Info& t) { return t.landscape == "fixed"; };
    write_long(dir / "fig7.csv", fitness_series(is_fixed));

    std::vector<Series> symbols;
    for (const auto& name : order) {
        const auto& t = info.at(name);
        if (!is_fixed(t)) continue;
        static constexpr const char* labels[] = {"1", "0", "?"};
        for (std::size_t k = 0; k < 3; ++k) {
            Series s{name + ":" + labels[k], {}};
            for (std::size_t i = 0; i < t.symbols.size(); ++i) s.points.emplace_back(t.symbol_generations[i], t.symbols[i][k]);
            symbols.push_back(std::move(s));
        }
    }
    write_long(dir / "fig8.csv", symbols);

    write_long(dir / "fig9.csv", fitness_series([](const Info& t) {
                   return t.landscape == "variable" &&
                          (t.strategy == "nolearning" || t.strategy == "rollouts" || t.strategy == "asocial");
               }));
    write_long(dir / "fig10.csv", fitness_series([](const Info& t) {
                   return t.landscape == "variable" && (t.strategy == "plastic_expansion" ||
                                                        t.strategy == "tabulist" || t.strategy == "social");
               }));
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string resolve_grammar_path(const std::string& path) {
    if (fs::exists(path)) return path;
    const fs::path shipped = fs::path(PLASTIGEN_GRAMMAR_DIR) / path;
    if (fs::exists(shipped)) return shipped.string();
    const fs::path by_name = fs::path(PLASTIGEN_GRAMMAR_DIR) / fs::path(path).filename();
    if (fs::exists(by_name)) return by_name.string();
    return path;
}

bool apply_evo_setting(EvoConfig& cfg, const std::string& key, const std::string& value) {
    auto size = [&] { return parse_number<std::size_t>(value, key); };
    if (key == "population_size") cfg.population_size = size();
    else if (key == "generations") cfg.generations = size();
    else if (key == "crossover_probability") cfg.crossover_probability = parse_real(value, key);
    else if (key == "tournament_size") cfg.tournament_size = size();
    else if (key == "elites") cfg.elites = size();
    else if (key == "max_init_depth") cfg.max_init_depth = size();
    else if (key == "max_depth") cfg.max_depth = size();
    else if (key == "learning_trials") cfg.learning_trials = size();
    else if (key == "target_length") cfg.target_length = size();
    else if (key == "phenotype_cap") cfg.phenotype_cap = size();
    else if (key == "tabu_retries") cfg.tabu_retries = size();
    else if (key == "stop_on_success") cfg.stop_on_success = parse_bool(value, key);
    else if (key == "ramped_init") cfg.ramped_init = parse_bool(value, key);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, key);
    else if (key == "grammar") cfg.grammar = value;
    else if (key == "social_board") cfg.social_board = parse_board_policy(value);
    else if (key == "social_ipl") cfg.social_ipl = parse_social_ipl(value);
    else if (key == "strategy") {
        try {
            cfg.strategy = parse_strategy(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else return false;
    return true;
}

ExperimentSpec parse_experiment_config(std::istream& in) {
    ExperimentSpec spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (key == "replications") spec.replications = parse_number<std::size_t>(value, key);
        else if (key == "base_seed") spec.base_seed = parse_number<std::uint64_t>(value, key);
        else if (key == "output_dir") spec.output_dir = value;
        else if (key == "jobs") spec.jobs = parse_number<std::size_t>(value, key);
        else if (key == "treatment") {
            std::istringstream fields(value);
            Treatment t;
            std::string strategy, extra;
            if (!(fields >> t.name >> t.grammar >> strategy) || (fields >> extra))
                throw ConfigError("line " + std::to_string(line_no) + ": treatment = NAME GRAMMAR STRATEGY");
            try {
                t.strategy = parse_strategy(strategy);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            spec.treatments.push_back(std::move(t));
        } else if (!apply_evo_setting(spec.evo, key, value)) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (spec.treatments.empty()) spec.treatments = standard_treatments();
    return spec;
}

ExperimentSpec load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return parse_experiment_config(in);
}

}  // namespace plastigen
