#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "plastigen/grammar.hpp"

namespace testing {

inline std::string grammar_path(const std::string& name) { return std::string(PLASTIGEN_GRAMMAR_DIR) + "/" + name; }

inline plastigen::Grammar shipped(const std::string& name) { return plastigen::load_grammar(grammar_path(name)); }

// The four published grammars plus the plastic-free variable one.
inline const std::vector<std::string>& grammar_files() {
    static const std::vector<std::string> files{"fixed_nolearning.bnf", "fixed_plastic.bnf", "variable_plastic.bnf",
                                                "variable_expansion.bnf", "variable_nolearning.bnf"};
    return files;
}

// Pearson statistic against equal expected counts.
inline double chi_square_uniform(const std::vector<long>& observed) {
    long total = 0;
    for (auto o : observed) total += o;
    const double expected = static_cast<double>(total) / static_cast<double>(observed.size());
    double stat = 0;
    for (auto o : observed) stat += (o - expected) * (o - expected) / expected;
    return stat;
}

// Upper 0.1% points of the chi-square distribution.
inline double chi_square_critical_999(std::size_t df) {
    switch (df) {
        case 1: return 10.827566;
        case 2: return 13.815511;
        case 3: return 16.266236;
        case 7: return 24.321886;
        case 15: return 37.697298;
        case 255: return 330.519744;
    }
    throw std::invalid_argument("no tabulated critical value");
}

}  // namespace testing
