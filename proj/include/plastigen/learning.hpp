#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "plastigen/landscape.hpp"
#include "plastigen/mapper.hpp"
#include "plastigen/random.hpp"

namespace plastigen {

enum class Strategy { nolearning, rollouts, asocial, plastic_expansion, tabulist, social };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

/// Count of phenotype lengths; index is the length.
class LengthHistogram {
public:
    void add(std::size_t length, std::uint64_t times = 1);
    void merge(const LengthHistogram& other);

    std::uint64_t count(std::size_t length) const {
        return length < counts_.size() ? counts_[length] : 0;
    }
    std::uint64_t total() const { return total_; }
    bool empty() const { return total_ == 0; }
    /// Largest length with a non-zero count; 0 when empty.
    std::size_t max_length() const;
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    double mean() const;
    /// Population standard deviation.
    double stddev() const;

    friend bool operator==(const LengthHistogram&, const LengthHistogram&) = default;

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

struct TrialRecord {
    TrialCount trials_taken;
    /// The target when found, otherwise the phenotype expressed on the last
    /// trial. Empty when every trial was short-circuited by the 0-locus rule.
    Phenotype best_phenotype;
    std::size_t max_expressed_length = 0;  // IPL at the end of the lifetime
    LengthHistogram expressed_lengths;
    /// Tabulist regenerations triggered by already-seen phenotypes.
    std::size_t duplicate_retries = 0;

    bool success() const { return trials_taken.has_value(); }
};

/// What the social strategy uses as IPL: the longest phenotype expressed so far
/// in this lifetime, or 0 for the whole lifetime.
enum class SocialIpl { lifetime, frozen };

struct LearningParams {
    FitnessParams fitness;
    /// Upper bound on the length of any expanded phenome.
    std::size_t phenotype_cap = 100;
    std::size_t tabu_retries = 10;
    SocialIpl social_ipl = SocialIpl::lifetime;
};

/// Run-wide best fitness and the longest phenotype its holder expressed.
struct SocialBoard {
    double best_fitness = std::numeric_limits<double>::infinity();
    std::size_t mpl = 0;
    bool initialized = false;
};

/// Strictly better fitness replaces the board; ties and worse results leave it.
SocialBoard board_update(SocialBoard board, double fitness, std::size_t max_expressed_length);

/// Phenotypes one individual has expressed during its current evaluation.
///
/// Phenotypes of up to 120 bits are packed into a flat open-addressing table;
/// longer ones fall back to a string set.
class TabuMemory {
public:
    explicit TabuMemory(std::size_t retry_limit = 10) : retry_limit(retry_limit) {}

    bool contains(std::string_view phenotype) const;
    /// Returns false when the phenotype was already present.
    bool insert(std::string_view phenotype);
    std::size_t size() const { return size_ + long_.size(); }
    bool empty() const { return size() == 0; }
    void clear();

    std::size_t retry_limit;

private:
    struct Key {
        std::uint64_t lo = 0;
        std::uint64_t hi = 0;
        friend bool operator==(const Key&, const Key&) = default;
    };
    static bool pack(std::string_view phenotype, Key& key);
    std::size_t find_slot(const Key& key) const;
    void grow();

    std::vector<Key> slots_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 1;
    std::size_t size_ = 0;
    std::unordered_set<std::string> long_;
};

class LearningError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PlasticInNoLearning : public LearningError {
public:
    using LearningError::LearningError;
};

class StructuralPlasticUnsupported : public LearningError {
public:
    using LearningError::LearningError;
};

/// Rewrites every `~` into one `?` followed by Geometric(1/2) - 1 further
/// `?`s. Growth stops once the phenome reaches `cap` symbols.
Phenome expand_structural(const Phenome& ph, Rng& rng, std::size_t cap = 100);

/// Replaces each `?` by a uniform bit. `ph` must hold no `~`.
Phenotype resolve_content(const Phenome& ph, Rng& rng);

/// Sizes the `~` expansion from the social board:
/// PL' = PL + |MPL - IPL|, with the extra `?`s dealt round-robin from the
/// leftmost `~`. Phenomes without `~` are returned unchanged.
Phenome social_expand(const Phenome& ph, const SocialBoard& board, std::size_t ipl_so_far,
                      std::size_t cap = 100);

TrialRecord evaluate_nolearning(const Phenome& ph, const LearningParams& params);
TrialRecord evaluate_rollouts(const Phenome& ph, const LearningParams& params, Rng& rng);
TrialRecord evaluate_asocial(const Phenome& ph, const LearningParams& params, Rng& rng);
TrialRecord evaluate_plastic_expansion(const Phenome& ph, const LearningParams& params, Rng& rng);
TrialRecord evaluate_tabulist(const Phenome& ph, const LearningParams& params, Rng& rng, TabuMemory& memory);
/// Falls back to plastic expansion while the board is uninitialized.
TrialRecord evaluate_social(const Phenome& ph, const LearningParams& params, Rng& rng,
                            const SocialBoard& board);

/// Dispatches on `strategy`.
TrialRecord evaluate(Strategy strategy, const Phenome& ph, const LearningParams& params, Rng& rng,
                     const SocialBoard& board, TabuMemory& memory);

}  // namespace plastigen
