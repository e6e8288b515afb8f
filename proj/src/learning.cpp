#include "plastigen/learning.hpp"

#include <algorithm>
#include <cmath>

namespace plastigen {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::nolearning: return "nolearning";
        case Strategy::rollouts: return "rollouts";
        case Strategy::asocial: return "asocial";
        case Strategy::plastic_expansion: return "plastic_expansion";
        case Strategy::tabulist: return "tabulist";
        case Strategy::social: return "social";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    for (auto s : {Strategy::nolearning, Strategy::rollouts, Strategy::asocial, Strategy::plastic_expansion,
                   Strategy::tabulist, Strategy::social})
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void LengthHistogram::add(std::size_t length, std::uint64_t times) {
    if (times == 0) return;
    if (length >= counts_.size()) counts_.resize(length + 1, 0);
    counts_[length] += times;
    total_ += times;
}

void LengthHistogram::merge(const LengthHistogram& other) {
    for (std::size_t len = 0; len < other.counts_.size(); ++len) add(len, other.counts_[len]);
}

std::size_t LengthHistogram::max_length() const {
    for (std::size_t len = counts_.size(); len-- > 0;)
        if (counts_[len] != 0) return len;
    return 0;
}

double LengthHistogram::mean() const {
    if (total_ == 0) return 0.0;
    long double sum = 0;
    for (std::size_t len = 0; len < counts_.size(); ++len) sum += static_cast<long double>(len) * counts_[len];
    return static_cast<double>(sum / total_);
}

double LengthHistogram::stddev() const {
    if (total_ == 0) return 0.0;
    const long double mu = mean();
    long double ss = 0;
    for (std::size_t len = 0; len < counts_.size(); ++len) {
        const long double d = static_cast<long double>(len) - mu;
        ss += d * d * counts_[len];
    }
    return static_cast<double>(std::sqrt(ss / total_));
}

SocialBoard board_update(SocialBoard board, double fitness, std::size_t max_expressed_length) {
    if (fitness < board.best_fitness) {
        board.best_fitness = fitness;
        board.mpl = max_expressed_length;
        board.initialized = true;
    }
    return board;
}

bool TabuMemory::pack(std::string_view phenotype, Key& key) {
    if (phenotype.size() > 120) return false;
    key = Key{};
    for (std::size_t i = 0; i < phenotype.size(); ++i) {
        const char c = phenotype[i];
        if (c == '0') continue;
        if (c != '1') return false;
        (i < 64 ? key.lo : key.hi) |= std::uint64_t{1} << (i % 64);
    }
    key.hi |= static_cast<std::uint64_t>(phenotype.size()) << 56;
    return true;
}

std::size_t TabuMemory::find_slot(const Key& key) const {
    const std::size_t mask = slots_.size() - 1;
    std::size_t i = mix64(key.lo ^ mix64(key.hi)) & mask;
    while (stamp_[i] == epoch_ && !(slots_[i] == key)) i = (i + 1) & mask;
    return i;
}

void TabuMemory::grow() {
    const auto old_slots = std::move(slots_);
    const auto old_stamp = std::move(stamp_);
    const auto old_epoch = epoch_;
    slots_.assign(old_slots.empty() ? 1024 : old_slots.size() * 2, Key{});
    stamp_.assign(slots_.size(), 0);
    epoch_ = 1;
    for (std::size_t i = 0; i < old_slots.size(); ++i) {
        if (old_stamp[i] != old_epoch) continue;
        const auto j = find_slot(old_slots[i]);
        slots_[j] = old_slots[i];
        stamp_[j] = epoch_;
    }
}

bool TabuMemory::contains(std::string_view phenotype) const {
    Key key;
    if (!pack(phenotype, key)) return long_.contains(std::string(phenotype));
    if (slots_.empty()) return false;
    return stamp_[find_slot(key)] == epoch_;
}

bool TabuMemory::insert(std::string_view phenotype) {
    Key key;
    if (!pack(phenotype, key)) return long_.insert(std::string(phenotype)).second;
    if ((size_ + 1) * 2 > slots_.size()) grow();
    const auto i = find_slot(key);
    if (stamp_[i] == epoch_) return false;
    slots_[i] = key;
    stamp_[i] = epoch_;
    ++size_;
    return true;
}

void TabuMemory::clear() {
    size_ = 0;
    long_.clear();
    if (++epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
    }
}

namespace {

/// Phenome flattened to one character per symbol for the trial loops.
struct Pattern {
    std::string code;
    std::size_t tildes = 0;
    std::size_t contents = 0;
    /// Holds a terminal other than `1`: no resolution can be the target.
    bool blocked = false;

    bool plastic() const { return tildes + contents > 0; }
};

Pattern compile(const Phenome& ph) {
    Pattern p;
    p.code.reserve(ph.size());
    for (const auto& s : ph.symbols) {
        switch (s.kind) {
            case SymbolKind::plastic_content: ++p.contents; break;
            case SymbolKind::plastic_structural: ++p.tildes; break;
            case SymbolKind::terminal:
                if (s.text.size() != 1)
                    throw LearningError("learning needs single-character terminals, got '" + s.text + "'");
                if (s.text != "1") p.blocked = true;
                break;
            case SymbolKind::nonterminal:
                throw LearningError("phenome holds unresolved nonterminal " + s.text);
        }
        p.code += s.text;
    }
    return p;
}

// Per-`~` sizes for one trial of geometric expansion; returns the total length.
std::size_t sample_expansion(const Pattern& p, Rng& rng, std::size_t cap, std::vector<std::size_t>& sizes) {
    sizes.resize(p.tildes);
    std::size_t budget = cap > p.code.size() ? cap - p.code.size() : 0;
    std::size_t length = p.code.size();
    for (auto& n : sizes) {
        const std::size_t extra = std::min<std::size_t>(rng.geometric_half() - 1, budget);
        budget -= extra;
        length += extra;
        n = 1 + extra;
    }
    return length;
}

// Per-`~` sizes from the social board; consumes no randomness.
std::size_t social_sizes(const Pattern& p, std::size_t mpl, std::size_t ipl, std::size_t cap,
                         std::vector<std::size_t>& sizes) {
    sizes.assign(p.tildes, 1);
    if (p.tildes == 0) return p.code.size();
    const std::size_t pl = p.code.size();
    const std::size_t gap = mpl > ipl ? mpl - ipl : ipl - mpl;
    std::size_t target = pl + gap;
    if (target > cap) target = std::max(cap, pl);
    const std::size_t extra = target - pl;
    for (std::size_t i = 0; i < p.tildes; ++i)
        sizes[i] += extra / p.tildes + (i < extra % p.tildes ? 1 : 0);
    return target;
}

// Writes the phenotype for the given `~` sizes, resolving each `?` to a fair bit.
void express(const Pattern& p, const std::vector<std::size_t>& sizes, Rng& rng, std::string& out) {
    out.clear();
    std::size_t t = 0;
    for (char c : p.code) {
        if (c == '?') {
            out += rng.bit() ? '1' : '0';
        } else if (c == '~') {
            for (std::size_t k = sizes[t]; k > 0; --k) out += rng.bit() ? '1' : '0';
            ++t;
        } else {
            out += c;
        }
    }
}

TrialRecord exact_target(const Pattern& p) {
    TrialRecord rec;
    rec.trials_taken = 0;
    rec.best_phenotype.bits = p.code;
    rec.max_expressed_length = p.code.size();
    rec.expressed_lengths.add(p.code.size());
    return rec;
}

// Every trial would express a phenotype of the same length that cannot be
// the target; record the lengths without drawing them.
TrialRecord constant_failure(const Pattern& p, const LearningParams& params, std::string best) {
    TrialRecord rec;
    rec.best_phenotype.bits = std::move(best);
    rec.max_expressed_length = p.code.size();
    rec.expressed_lengths.add(p.code.size(), params.fitness.max_trials);
    return rec;
}

enum class Shape { geometric, social };

// Shared lifetime loop for the expansion-based strategies.
TrialRecord learn(const Pattern& p, const LearningParams& params, Rng& rng, Shape shape, std::size_t mpl,
                  TabuMemory* tabu) {
    const auto& fp = params.fitness;
    TrialRecord rec;
    std::vector<std::size_t> sizes;
    std::string phenotype;
    phenotype.reserve(params.phenotype_cap + p.code.size());

    auto draw = [&] {
        if (shape == Shape::geometric) return sample_expansion(p, rng, params.phenotype_cap, sizes);
        const std::size_t ipl = params.social_ipl == SocialIpl::lifetime ? rec.max_expressed_length : 0;
        return social_sizes(p, mpl, ipl, params.phenotype_cap, sizes);
    };

    if (tabu) tabu->clear();
    for (std::size_t t = 1; t <= fp.max_trials; ++t) {
        std::size_t length = draw();
        const bool candidate = !p.blocked && length == fp.target_length;
        const bool materialize = tabu || candidate || t == fp.max_trials;
        if (materialize) express(p, sizes, rng, phenotype);
        if (tabu) {
            for (std::size_t r = 0; r < tabu->retry_limit && tabu->contains(phenotype); ++r) {
                if (!p.plastic()) {
                    // nothing can change: the remaining retries all repeat
                    rec.duplicate_retries += tabu->retry_limit - r;
                    break;
                }
                ++rec.duplicate_retries;
                length = draw();
                express(p, sizes, rng, phenotype);
            }
            tabu->insert(phenotype);
        }
        rec.expressed_lengths.add(length);
        rec.max_expressed_length = std::max(rec.max_expressed_length, length);
        if (materialize && is_perfect(phenotype, fp)) {
            rec.trials_taken = t;
            rec.best_phenotype.bits = phenotype;
            return rec;
        }
    }
    rec.best_phenotype.bits = std::move(phenotype);
    return rec;
}

void require_plastic_free(const Pattern& p, const char* strategy) {
    if (p.plastic())
        throw PlasticInNoLearning(std::string(strategy) + " cannot evaluate a phenome with plastic symbols");
}

}  // namespace

Phenome expand_structural(const Phenome& ph, Rng& rng, std::size_t cap) {
    Phenome out;
    out.depth = ph.depth;
    std::size_t budget = cap > ph.size() ? cap - ph.size() : 0;
    const Symbol q = Symbol::classify("?");
    for (const auto& s : ph.symbols) {
        if (s.kind != SymbolKind::plastic_structural) {
            out.symbols.push_back(s);
            continue;
        }
        const std::size_t extra = std::min<std::size_t>(rng.geometric_half() - 1, budget);
        budget -= extra;
        out.symbols.insert(out.symbols.end(), 1 + extra, q);
    }
    return out;
}

Phenotype resolve_content(const Phenome& ph, Rng& rng) {
    Phenotype out;
    out.bits.reserve(ph.size());
    for (const auto& s : ph.symbols) {
        if (s.kind == SymbolKind::plastic_structural)
            throw StructuralPlasticUnsupported("resolve_content: expand `~` first");
        if (s.kind == SymbolKind::plastic_content)
            out.bits += rng.bit() ? '1' : '0';
        else
            out.bits += s.text;
    }
    return out;
}

Phenome social_expand(const Phenome& ph, const SocialBoard& board, std::size_t ipl_so_far, std::size_t cap) {
    const Pattern p = compile(ph);
    if (p.tildes == 0) return ph;
    std::vector<std::size_t> sizes;
    social_sizes(p, board.mpl, ipl_so_far, cap, sizes);

    Phenome out;
    out.depth = ph.depth;
    const Symbol q = Symbol::classify("?");
    std::size_t t = 0;
    for (const auto& s : ph.symbols) {
        if (s.kind == SymbolKind::plastic_structural)
            out.symbols.insert(out.symbols.end(), sizes[t++], q);
        else
            out.symbols.push_back(s);
    }
    return out;
}

TrialRecord evaluate_nolearning(const Phenome& ph, const LearningParams& params) {
    const Pattern p = compile(ph);
    require_plastic_free(p, "nolearning");
    if (is_perfect(p.code, params.fitness)) return exact_target(p);
    TrialRecord rec;
    rec.best_phenotype.bits = p.code;
    rec.max_expressed_length = p.code.size();
    rec.expressed_lengths.add(p.code.size());
    return rec;
}

TrialRecord evaluate_rollouts(const Phenome& ph, const LearningParams& params, Rng& rng) {
    const Pattern p = compile(ph);
    require_plastic_free(p, "rollouts");
    const auto& fp = params.fitness;
    if (is_perfect(p.code, fp)) return exact_target(p);
    // flips never change the length
    if (p.code.size() != fp.target_length) return constant_failure(p, params, p.code);

    const std::size_t n = p.code.size();
    const double flip = 1.0 / static_cast<double>(n);
    TrialRecord rec;
    rec.max_expressed_length = n;
    std::string variant;
    for (std::size_t t = 1; t <= fp.max_trials; ++t) {
        variant = p.code;
        bool perfect = true;
        for (auto& c : variant) {
            if (rng.chance(flip)) c = c == '1' ? '0' : '1';
            perfect = perfect && c == '1';
        }
        rec.expressed_lengths.add(n);
        if (perfect) {
            rec.trials_taken = t;
            rec.best_phenotype.bits = std::move(variant);
            return rec;
        }
    }
    rec.best_phenotype.bits = std::move(variant);
    return rec;
}

TrialRecord evaluate_asocial(const Phenome& ph, const LearningParams& params, Rng& rng) {
    const Pattern p = compile(ph);
    if (p.tildes > 0) throw StructuralPlasticUnsupported("asocial learning cannot expand `~`");
    const auto& fp = params.fitness;
    if (!p.plastic() && is_perfect(p.code, fp)) return exact_target(p);
    // a fixed 0 (or the wrong length) rules out the target for every resolution
    if (!p.plastic()) return constant_failure(p, params, p.code);
    if (p.blocked || p.code.size() != fp.target_length) return constant_failure(p, params, {});
    return learn(p, params, rng, Shape::geometric, 0, nullptr);
}

TrialRecord evaluate_plastic_expansion(const Phenome& ph, const LearningParams& params, Rng& rng) {
    const Pattern p = compile(ph);
    if (!p.plastic()) {
        if (is_perfect(p.code, params.fitness)) return exact_target(p);
        return constant_failure(p, params, p.code);
    }
    return learn(p, params, rng, Shape::geometric, 0, nullptr);
}

TrialRecord evaluate_tabulist(const Phenome& ph, const LearningParams& params, Rng& rng, TabuMemory& memory) {
    const Pattern p = compile(ph);
    if (!p.plastic() && is_perfect(p.code, params.fitness)) return exact_target(p);
    return learn(p, params, rng, Shape::geometric, 0, &memory);
}

TrialRecord evaluate_social(const Phenome& ph, const LearningParams& params, Rng& rng, const SocialBoard& board) {
    if (!board.initialized) return evaluate_plastic_expansion(ph, params, rng);
    const Pattern p = compile(ph);
    if (!p.plastic()) {
        if (is_perfect(p.code, params.fitness)) return exact_target(p);
        return constant_failure(p, params, p.code);
    }
    return learn(p, params, rng, p.tildes > 0 ? Shape::social : Shape::geometric, board.mpl, nullptr);
}

TrialRecord evaluate(Strategy strategy, const Phenome& ph, const LearningParams& params, Rng& rng,
                     const SocialBoard& board, TabuMemory& memory) {
    switch (strategy) {
        case Strategy::nolearning: return evaluate_nolearning(ph, params);
        case Strategy::rollouts: return evaluate_rollouts(ph, params, rng);
        case Strategy::asocial: return evaluate_asocial(ph, params, rng);
        case Strategy::plastic_expansion: return evaluate_plastic_expansion(ph, params, rng);
        case Strategy::tabulist: return evaluate_tabulist(ph, params, rng, memory);
        case Strategy::social: return evaluate_social(ph, params, rng, board);
    }
    throw std::logic_error("unhandled strategy");
}

}  // namespace plastigen
