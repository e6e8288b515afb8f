#include "plastigen/mapper.hpp"

#include <algorithm>
#include <cassert>

namespace plastigen {

std::string Phenome::text() const {
    std::string out;
    for (const auto& s : symbols) out += s.text;
    return out;
}

bool Phenome::has_plastic() const {
    return std::any_of(symbols.begin(), symbols.end(), [](const Symbol& s) { return s.is_plastic(); });
}

Phenome Phenome::from_text(std::string_view text) {
    Phenome p;
    p.symbols.reserve(text.size());
    for (char c : text) p.symbols.push_back(Symbol::classify(std::string_view(&c, 1)));
    return p;
}

std::string_view to_string(MapFailure f) {
    return f == MapFailure::out_of_codons ? "out_of_codons" : "depth_exceeded";
}

MapOutcome map_codons(std::span<const Codon> codons, const Grammar& g, std::size_t max_depth) {
    struct Pending {
        const Symbol* symbol;
        std::size_t level;
    };
    const Symbol root = Symbol::classify(g.start());

    Phenome out;
    std::size_t next = 0;
    std::vector<Pending> stack{{&root, 1}};
    while (!stack.empty()) {
        const auto [sym, level] = stack.back();
        stack.pop_back();
        if (!sym->is_nonterminal()) {
            out.symbols.push_back(*sym);
            continue;
        }
        if (level > max_depth) return {MapFailure::depth_exceeded, next};
        out.depth = std::max(out.depth, level);

        const auto& prods = g.rule(sym->text).productions;
        std::size_t choice = 0;
        if (prods.size() > 1) {
            if (next == codons.size()) return {MapFailure::out_of_codons, next};
            choice = codons[next++] % prods.size();
        }
        const auto& chosen = prods[choice];
        for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) stack.push_back({&*it, level + 1});
    }
    return {std::move(out), next};
}

MapOutcome map(Genome& genome, const Grammar& g, std::size_t max_depth) {
    auto outcome = map_codons(genome.codons, g, max_depth);
    genome.used_length = outcome.used_codons;
    return outcome;
}

Genome pigrow_init(const Grammar& g, std::size_t max_init_depth, Rng& rng) {
    if (g.min_depth(g.start()) > max_init_depth)
        throw InfeasibleDepth("start rule needs depth " + std::to_string(g.min_depth(g.start())) +
                              " but the initialisation limit is " + std::to_string(max_init_depth));

    struct Node {
        std::size_t rule;
        std::size_t level;
        std::size_t production = 0;
        std::vector<std::size_t> children;
    };
    const auto& rules = g.rules();
    const std::size_t limit = max_init_depth;

    std::vector<Node> nodes{{g.rule_index(g.start()), 1, 0, {}}};
    std::vector<std::size_t> pending{0};

    auto deep_capable = [&](const Node& n) {
        const auto reach = g.max_depth(rules[n.rule].lhs);
        return reach == unbounded_depth || n.level - 1 + reach >= limit;
    };
    bool reached = limit <= 1;
    const bool can_force = deep_capable(nodes[0]);

    std::vector<std::size_t> feasible;
    std::vector<std::size_t> deep;
    while (!pending.empty()) {
        const auto slot = rng.below(pending.size());
        const auto id = pending[slot];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(slot));

        const auto level = nodes[id].level;
        const auto& prods = rules[nodes[id].rule].productions;
        feasible.clear();
        deep.clear();
        for (std::size_t p = 0; p < prods.size(); ++p) {
            const auto lo = g.min_depth(prods[p]);
            if (lo == unbounded_depth || level - 1 + lo > limit) continue;
            feasible.push_back(p);
            const auto hi = g.max_depth(prods[p]);
            if (hi == unbounded_depth || level - 1 + hi >= limit) deep.push_back(p);
        }
        assert(!feasible.empty());

        const bool last_hope =
            can_force && !reached && !deep.empty() &&
            std::none_of(pending.begin(), pending.end(), [&](std::size_t o) { return deep_capable(nodes[o]); });
        const auto& choices = last_hope ? deep : feasible;
        const auto production = choices[rng.below(choices.size())];
        nodes[id].production = production;

        for (const auto& s : prods[production]) {
            if (!s.is_nonterminal()) continue;
            const auto child = nodes.size();
            nodes.push_back({g.rule_index(s.text), level + 1, 0, {}});
            nodes[id].children.push_back(child);
            pending.push_back(child);
            if (level + 1 >= limit) reached = true;
        }
    }

    // Leftmost-derivation encoding: preorder over nonterminal children.
    Genome genome;
    std::vector<std::size_t> order{0};
    while (!order.empty()) {
        const auto id = order.back();
        order.pop_back();
        const auto& node = nodes[id];
        const auto n = rules[node.rule].productions.size();
        if (n > 1) {
            const auto spare = (codon_values - 1 - node.production) / n;
            genome.codons.push_back(static_cast<Codon>(node.production + n * rng.below(spare + 1)));
        }
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) order.push_back(*it);
    }
    if (genome.codons.empty()) genome.codons.push_back(static_cast<Codon>(rng.below(codon_values)));
    return genome;
}

std::pair<Genome, Genome> splice(const Genome& a, std::size_t cut_a, const Genome& b, std::size_t cut_b) {
    Genome c1, c2;
    c1.codons.reserve(cut_a + b.codons.size() - cut_b);
    c1.codons.insert(c1.codons.end(), a.codons.begin(), a.codons.begin() + static_cast<std::ptrdiff_t>(cut_a));
    c1.codons.insert(c1.codons.end(), b.codons.begin() + static_cast<std::ptrdiff_t>(cut_b), b.codons.end());
    c2.codons.reserve(cut_b + a.codons.size() - cut_a);
    c2.codons.insert(c2.codons.end(), b.codons.begin(), b.codons.begin() + static_cast<std::ptrdiff_t>(cut_b));
    c2.codons.insert(c2.codons.end(), a.codons.begin() + static_cast<std::ptrdiff_t>(cut_a), a.codons.end());
    return {std::move(c1), std::move(c2)};
}

std::pair<Genome, Genome> crossover_variable_onepoint(const Genome& a, const Genome& b, Rng& rng) {
    const auto used_a = std::min(a.active_length(), a.codons.size());
    const auto used_b = std::min(b.active_length(), b.codons.size());
    while (true) {
        const auto cut_a = rng.below(used_a + 1);
        const auto cut_b = rng.below(used_b + 1);
        // a child made only of the other parent's empty tail would have no codons
        if (cut_a + (b.codons.size() - cut_b) == 0 || cut_b + (a.codons.size() - cut_a) == 0) continue;
        return splice(a, cut_a, b, cut_b);
    }
}

Genome mutate_int(const Genome& genome, Rng& rng) {
    Genome out = genome;
    const auto span = std::min(genome.active_length(), genome.codons.size());
    const auto pos = rng.below(span);
    out.codons[pos] = static_cast<Codon>(rng.below(codon_values));
    return out;
}

}  // namespace plastigen
