#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "plastigen/grammar.hpp"
#include "plastigen/random.hpp"

namespace plastigen {

using Codon = std::uint8_t;
inline constexpr unsigned codon_values = 256;

struct Genome {
    std::vector<Codon> codons;
    /// Codons consumed by the most recent mapping; 0 if never mapped.
    std::size_t used_length = 0;

    /// Region that genetic operators act on: the used codons, or the whole
    /// genome if it has not been mapped.
    std::size_t active_length() const { return used_length > 0 ? used_length : codons.size(); }

    friend bool operator==(const Genome&, const Genome&) = default;
};

/// Fully derived solution string that may still hold plastic symbols.
struct Phenome {
    std::vector<Symbol> symbols;
    std::size_t depth = 0;

    std::size_t size() const { return symbols.size(); }
    std::string text() const;
    bool has_plastic() const;

    /// Builds a phenome from single-character symbols (`0`, `1`, `?`, `~`).
    static Phenome from_text(std::string_view text);

    friend bool operator==(const Phenome&, const Phenome&) = default;
};

enum class MapFailure { out_of_codons, depth_exceeded };

std::string_view to_string(MapFailure f);

struct MapOutcome {
    std::variant<Phenome, MapFailure> result;
    std::size_t used_codons = 0;

    bool ok() const { return std::holds_alternative<Phenome>(result); }
    const Phenome& phenome() const { return std::get<Phenome>(result); }
    MapFailure failure() const { return std::get<MapFailure>(result); }
};

/// Grammatical-evolution mapping by leftmost derivation with the mod rule.
///
/// Nonterminals with a single production consume no codon. There is no
/// wrapping: running out of codons yields `out_of_codons`. A nonterminal
/// placed deeper than `max_depth` yields `depth_exceeded`.
MapOutcome map_codons(std::span<const Codon> codons, const Grammar& g, std::size_t max_depth);

/// As map_codons, and records the consumed codon count in `genome.used_length`.
MapOutcome map(Genome& genome, const Grammar& g, std::size_t max_depth);

class InfeasibleDepth : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Position-independent grow initialisation.
///
/// Expands pending nonterminals in random order, choosing uniformly among the
/// productions that can still complete within `max_init_depth`. While the
/// tree has not yet reached `max_init_depth`, the last pending node able to
/// reach it is restricted to productions that keep that possibility open.
/// The finished tree is encoded in leftmost-derivation order, one codon per
/// multi-production choice, so that `map` reproduces it.
Genome pigrow_init(const Grammar& g, std::size_t max_init_depth, Rng& rng);

/// One-point crossover with independent cut points in [0, used] of each
/// parent. Tails (including unused codons) are swapped.
std::pair<Genome, Genome> crossover_variable_onepoint(const Genome& a, const Genome& b, Rng& rng);

/// Deterministic splice used by crossover: (a[:cut_a] + b[cut_b:], b[:cut_b] + a[cut_a:]).
std::pair<Genome, Genome> splice(const Genome& a, std::size_t cut_a, const Genome& b, std::size_t cut_b);

/// Replaces one codon in the active region with a fresh uniform value.
Genome mutate_int(const Genome& genome, Rng& rng);

}  // namespace plastigen
