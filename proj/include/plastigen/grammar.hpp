#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace plastigen {

enum class SymbolKind { terminal, nonterminal, plastic_content, plastic_structural };

std::string_view to_string(SymbolKind kind);

struct Symbol {
    SymbolKind kind = SymbolKind::terminal;
    std::string text;

    /// Classifies a single token: `?` and `~` are plastic, `<...>` is a
    /// nonterminal, anything else is a terminal.
    static Symbol classify(std::string_view token);

    bool is_nonterminal() const { return kind == SymbolKind::nonterminal; }
    bool is_plastic() const {
        return kind == SymbolKind::plastic_content || kind == SymbolKind::plastic_structural;
    }

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

using Production = std::vector<Symbol>;

struct Rule {
    std::string lhs;
    std::vector<Production> productions;

    friend bool operator==(const Rule&, const Rule&) = default;
};

class GrammarError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UndefinedNonterminal : public GrammarError {
public:
    using GrammarError::GrammarError;
};

class EmptyProduction : public GrammarError {
public:
    using GrammarError::GrammarError;
};

class MalformedRule : public GrammarError {
public:
    using GrammarError::GrammarError;
};

class NonTerminating : public GrammarError {
public:
    using GrammarError::GrammarError;
};

/// Depth value used for nonterminals that can derive arbitrarily deep trees.
inline constexpr std::size_t unbounded_depth = std::numeric_limits<std::size_t>::max();

/// A parsed BNF rule table.
///
/// Rules keep file order and productions keep textual order; the production
/// index is what the genotype mapping selects, so duplicates are retained.
/// Immutable once built.
///
/// Depth convention: a nonterminal whose chosen production contains only
/// terminals or plastic symbols has depth 1; otherwise its depth is one more
/// than its deepest nonterminal child.
class Grammar {
public:
    const std::vector<Rule>& rules() const { return rules_; }
    const std::string& start() const { return rules_.front().lhs; }

    bool defines(std::string_view nt) const;
    const Rule& rule(std::string_view nt) const;
    std::size_t rule_index(std::string_view nt) const;

    /// Minimum depth of a complete derivation rooted at `nt`.
    std::size_t min_depth(std::string_view nt) const;
    /// Maximum derivation depth reachable from `nt`; `unbounded_depth` for
    /// recursive rules.
    std::size_t max_depth(std::string_view nt) const;

    /// Minimum depth of the subtree produced by choosing `production` at a
    /// node; 1 when the production holds no nonterminals.
    std::size_t min_depth(const Production& production) const;
    std::size_t max_depth(const Production& production) const;

    /// Serializes back to the BNF text format (one rule per line).
    std::string to_bnf() const;

    friend bool operator==(const Grammar& a, const Grammar& b) { return a.rules_ == b.rules_; }

private:
    friend Grammar parse_grammar(std::string_view text);

    void index_rules();
    void compute_depths();

    std::vector<Rule> rules_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> min_depth_;
    std::vector<std::size_t> max_depth_;
};

Grammar parse_grammar(std::string_view text);
Grammar load_grammar(const std::string& path);

std::size_t production_count(const Grammar& g, std::string_view nt);
std::size_t min_depth(const Grammar& g, std::string_view nt);

}  // namespace plastigen
