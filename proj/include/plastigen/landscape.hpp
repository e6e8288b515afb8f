#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace plastigen {

/// Fully resolved bit string, stored as characters `0`/`1`.
struct Phenotype {
    std::string bits;

    std::size_t length() const { return bits.size(); }
    friend bool operator==(const Phenotype&, const Phenotype&) = default;
};

struct FitnessParams {
    std::size_t target_length = 20;  // L
    std::size_t max_trials = 1000;   // T

    std::string target() const { return std::string(target_length, '1'); }
    double worst() const { return static_cast<double>(target_length); }
};

/// Learning trials taken to reach the target; empty when it was never found.
using TrialCount = std::optional<std::size_t>;
inline constexpr TrialCount not_found = std::nullopt;

class TrialOverflow : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

bool is_perfect(const Phenotype& p, const FitnessParams& params);
bool is_perfect(std::string_view bits, const FitnessParams& params);

/// 1 + (L - 1) * t / T, or L when the target was not found. Lower is better.
double fitness_from_trials(TrialCount t, const FitnessParams& params);

}  // namespace plastigen
