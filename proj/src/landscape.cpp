#include "plastigen/landscape.hpp"

#include <algorithm>

namespace plastigen {

bool is_perfect(std::string_view bits, const FitnessParams& params) {
    return bits.size() == params.target_length &&
           std::all_of(bits.begin(), bits.end(), [](char c) { return c == '1'; });
}

bool is_perfect(const Phenotype& p, const FitnessParams& params) { return is_perfect(p.bits, params); }

double fitness_from_trials(TrialCount t, const FitnessParams& params) {
    if (!t) return params.worst();
    if (*t > params.max_trials)
        throw TrialOverflow("trial count " + std::to_string(*t) + " exceeds the limit of " +
                            std::to_string(params.max_trials));
    const double L = static_cast<double>(params.target_length);
    return 1.0 + (L - 1.0) * (static_cast<double>(*t) / static_cast<double>(params.max_trials));
}

}  // namespace plastigen
