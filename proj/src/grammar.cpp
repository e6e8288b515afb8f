#include "plastigen/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace plastigen {

std::string_view to_string(SymbolKind kind) {
    switch (kind) {
        case SymbolKind::terminal: return "terminal";
        case SymbolKind::nonterminal: return "nonterminal";
        case SymbolKind::plastic_content: return "plastic_content";
        case SymbolKind::plastic_structural: return "plastic_structural";
    }
    return "?";
}

Symbol Symbol::classify(std::string_view token) {
    if (token == "?") return {SymbolKind::plastic_content, std::string(token)};
    if (token == "~") return {SymbolKind::plastic_structural, std::string(token)};
    if (token.size() >= 2 && token.front() == '<' && token.back() == '>')
        return {SymbolKind::nonterminal, std::string(token)};
    return {SymbolKind::terminal, std::string(token)};
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits one alternative into symbols. `<...>` is always a single token, so
// `<s><s>` and `~<phenome>` need no separating whitespace.
Production tokenize(std::string_view alt, std::size_t line_no) {
    Production out;
    std::size_t i = 0;
    while (i < alt.size()) {
        const char c = alt[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '<') {
            const auto close = alt.find('>', i);
            if (close == std::string_view::npos)
                throw MalformedRule("line " + std::to_string(line_no) + ": unterminated '<'");
            if (close == i + 1)
                throw MalformedRule("line " + std::to_string(line_no) + ": empty nonterminal '<>'");
            out.push_back(Symbol::classify(alt.substr(i, close - i + 1)));
            i = close + 1;
        } else if (c == '>') {
            throw MalformedRule("line " + std::to_string(line_no) + ": stray '>'");
        } else {
            std::size_t j = i;
            while (j < alt.size() && !std::isspace(static_cast<unsigned char>(alt[j])) &&
                   alt[j] != '<' && alt[j] != '>')
                ++j;
            out.push_back(Symbol::classify(alt.substr(i, j - i)));
            i = j;
        }
    }
    return out;
}

std::vector<Production> split_alternatives(std::string_view body, std::size_t line_no) {
    std::vector<Production> prods;
    std::size_t begin = 0;
    while (true) {
        const auto bar = body.find('|', begin);
        const auto alt = body.substr(begin, bar == std::string_view::npos ? body.npos : bar - begin);
        Production p = tokenize(alt, line_no);
        if (p.empty())
            throw EmptyProduction("line " + std::to_string(line_no) + ": empty alternative");
        prods.push_back(std::move(p));
        if (bar == std::string_view::npos) break;
        begin = bar + 1;
    }
    return prods;
}

std::size_t saturating_inc(std::size_t d) { return d == unbounded_depth ? d : d + 1; }

}  // namespace

bool Grammar::defines(std::string_view nt) const {
    return index_.find(std::string(nt)) != index_.end();
}

std::size_t Grammar::rule_index(std::string_view nt) const {
    const auto it = index_.find(std::string(nt));
    if (it == index_.end()) throw UndefinedNonterminal("undefined nonterminal " + std::string(nt));
    return it->second;
}

const Rule& Grammar::rule(std::string_view nt) const { return rules_[rule_index(nt)]; }

std::size_t Grammar::min_depth(std::string_view nt) const {
    const auto d = min_depth_[rule_index(nt)];
    if (d == unbounded_depth)
        throw NonTerminating("nonterminal " + std::string(nt) + " has no finite derivation");
    return d;
}

std::size_t Grammar::max_depth(std::string_view nt) const { return max_depth_[rule_index(nt)]; }

std::size_t Grammar::min_depth(const Production& production) const {
    std::size_t deepest = 0;
    for (const auto& s : production) {
        if (!s.is_nonterminal()) continue;
        const auto d = min_depth_[rule_index(s.text)];
        if (d == unbounded_depth) return unbounded_depth;
        deepest = std::max(deepest, d);
    }
    return deepest + 1;
}

std::size_t Grammar::max_depth(const Production& production) const {
    std::size_t deepest = 0;
    for (const auto& s : production)
        if (s.is_nonterminal()) deepest = std::max(deepest, max_depth_[rule_index(s.text)]);
    return saturating_inc(deepest);
}

void Grammar::index_rules() {
    index_.clear();
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        if (!index_.emplace(rules_[i].lhs, i).second)
            throw MalformedRule("duplicate rule for " + rules_[i].lhs);
    }
    for (const auto& r : rules_)
        for (const auto& p : r.productions)
            for (const auto& s : p)
                if (s.is_nonterminal() && !index_.contains(s.text))
                    throw UndefinedNonterminal("undefined nonterminal " + s.text + " referenced by " +
                                               r.lhs);
}

void Grammar::compute_depths() {
    const std::size_t n = rules_.size();

    // Shortest derivations: Bellman-Ford style relaxation to a fixed point.
    min_depth_.assign(n, unbounded_depth);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& p : rules_[i].productions) {
                const auto d = min_depth(p);
                if (d < min_depth_[i]) {
                    min_depth_[i] = d;
                    changed = true;
                }
            }
        }
    }

    // Longest derivations over terminating productions; any cycle among
    // terminating productions makes the depth unbounded.
    max_depth_.assign(n, 0);
    enum class Mark { fresh, active, done };
    std::vector<Mark> mark(n, Mark::fresh);
    auto visit = [&](auto&& self, std::size_t i) -> std::size_t {
        if (mark[i] == Mark::done) return max_depth_[i];
        if (mark[i] == Mark::active) return unbounded_depth;
        mark[i] = Mark::active;
        std::size_t best = 0;
        for (const auto& p : rules_[i].productions) {
            if (min_depth(p) == unbounded_depth) continue;
            std::size_t deepest = 0;
            for (const auto& s : p)
                if (s.is_nonterminal()) deepest = std::max(deepest, self(self, index_.at(s.text)));
            best = std::max(best, saturating_inc(deepest));
        }
        mark[i] = Mark::done;
        max_depth_[i] = best;
        return best;
    };
    for (std::size_t i = 0; i < n; ++i) visit(visit, i);
}

std::string Grammar::to_bnf() const {
    std::ostringstream os;
    for (const auto& r : rules_) {
        os << r.lhs << " ::=";
        for (std::size_t p = 0; p < r.productions.size(); ++p) {
            if (p > 0) os << " |";
            for (const auto& s : r.productions[p]) os << ' ' << s.text;
        }
        os << '\n';
    }
    return os.str();
}

Grammar parse_grammar(std::string_view text) {
    if (trim(text).empty()) throw MalformedRule("empty grammar text");

    // Collect logical lines; a line starting with '|' continues the previous rule.
    std::vector<std::pair<std::string, std::size_t>> logical;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '|' && !logical.empty()) {
            logical.back().first += ' ';
            logical.back().first += line;
        } else {
            logical.emplace_back(std::string(line), line_no);
        }
    }

    Grammar g;
    for (const auto& [line, no] : logical) {
        const auto sep = line.find("::=");
        if (sep == std::string::npos)
            throw MalformedRule("line " + std::to_string(no) + ": missing '::='");
        const auto lhs_text = trim(std::string_view(line).substr(0, sep));
        const auto lhs = Symbol::classify(lhs_text);
        if (!lhs.is_nonterminal() || lhs_text.find(' ') != std::string_view::npos)
            throw MalformedRule("line " + std::to_string(no) + ": left-hand side must be one <nonterminal>");
        g.rules_.push_back({lhs.text, split_alternatives(std::string_view(line).substr(sep + 3), no)});
    }
    g.index_rules();
    g.compute_depths();
    (void)g.min_depth(g.start());  // throws NonTerminating for a dead start rule
    return g;
}

Grammar load_grammar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grammar file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_grammar(ss.str());
}

std::size_t production_count(const Grammar& g, std::string_view nt) {
    return g.rule(nt).productions.size();
}

std::size_t min_depth(const Grammar& g, std::string_view nt) { return g.min_depth(nt); }

}  // namespace plastigen
