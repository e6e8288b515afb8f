#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "plastigen/learning.hpp"
#include "support.hpp"

using namespace plastigen;

namespace {

Phenome ph(std::string_view text) { return Phenome::from_text(text); }

std::string ones(std::size_t n) { return std::string(n, '1'); }

LearningParams with_trials(std::size_t trials, std::size_t target_length = 20) {
    LearningParams p;
    p.fitness.max_trials = trials;
    p.fitness.target_length = target_length;
    return p;
}

void check_record_invariants(const TrialRecord& rec, const LearningParams& p) {
    CHECK(rec.max_expressed_length == rec.expressed_lengths.max_length());
    if (rec.trials_taken) {
        CHECK(*rec.trials_taken <= p.fitness.max_trials);
        CHECK(rec.best_phenotype.bits == p.fitness.target());
    }
}

}  // namespace

TEST_SUITE("learning") {
    TEST_CASE("strategy names") {
        for (auto s : {Strategy::nolearning, Strategy::rollouts, Strategy::asocial, Strategy::plastic_expansion,
                       Strategy::tabulist, Strategy::social})
            CHECK(parse_strategy(to_string(s)) == s);
        CHECK_THROWS_AS(parse_strategy("lamarckian"), std::invalid_argument);
    }

    TEST_CASE("length histogram") {
        LengthHistogram h;
        h.add(5, 3);
        CHECK(h.mean() == 5.0);
        CHECK(h.stddev() == 0.0);
        h.add(1);
        h.add(9);
        CHECK(h.total() == 5);
        CHECK(h.max_length() == 9);
        CHECK(h.mean() == 5.0);
        CHECK(h.stddev() == doctest::Approx(std::sqrt(32.0 / 5.0)));
        LengthHistogram other;
        other.add(2, 2);
        h.merge(other);
        CHECK(h.count(2) == 2);
        CHECK(h.total() == 7);
    }

    TEST_CASE("nolearning") {
        const LearningParams p;
        auto hit = evaluate_nolearning(ph(ones(20)), p);
        CHECK(hit.trials_taken == std::optional<std::size_t>(0));
        CHECK(fitness_from_trials(hit.trials_taken, p.fitness) == 1.0);
        auto miss = evaluate_nolearning(ph(std::string(20, '0')), p);
        CHECK_FALSE(miss.success());
        CHECK(fitness_from_trials(miss.trials_taken, p.fitness) == 20.0);
        CHECK(miss.expressed_lengths.total() == 1);
        CHECK(miss.expressed_lengths.count(20) == 1);
        CHECK_THROWS_AS(evaluate_nolearning(ph("11?"), p), PlasticInNoLearning);
        CHECK_THROWS_AS(evaluate_nolearning(ph("11~"), p), PlasticInNoLearning);
    }

    TEST_CASE("rollouts") {
        const LearningParams p;
        Rng rng(1);
        CHECK(evaluate_rollouts(ph(ones(20)), p, rng).trials_taken == std::optional<std::size_t>(0));

        // per-trial hit probability (1/20)(19/20)^19 ~ 0.0189
        int found = 0;
        for (int i = 0; i < 300; ++i) {
            const auto rec = evaluate_rollouts(ph("0" + ones(19)), p, rng);
            check_record_invariants(rec, p);
            found += rec.success();
        }
        CHECK(found >= 298);

        const auto short_ph = evaluate_rollouts(ph(ones(19)), p, rng);
        CHECK_FALSE(short_ph.success());
        CHECK(short_ph.expressed_lengths.count(19) == 1000);
        CHECK_THROWS_AS(evaluate_rollouts(ph("1?"), p, rng), PlasticInNoLearning);
    }

    TEST_CASE("rollout hit rate matches the closed form") {
        const auto p = with_trials(1);
        Rng rng(2);
        const double q = (1.0 / 20) * std::pow(19.0 / 20, 19);
        int hits = 0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) hits += evaluate_rollouts(ph("0" + ones(19)), p, rng).success();
        const double sd = std::sqrt(q * (1 - q) / n);
        CHECK(std::abs(hits / double(n) - q) < 4 * sd);
    }

    TEST_CASE("asocial") {
        const LearningParams p;
        Rng rng(3);
        int found = 0;
        for (int i = 0; i < 200; ++i) found += evaluate_asocial(ph(std::string(20, '?')), p, rng).success();
        CHECK(found <= 1);

        double total = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const auto rec = evaluate_asocial(ph(ones(19) + "?"), p, rng);
            REQUIRE(rec.success());
            total += static_cast<double>(*rec.trials_taken);
        }
        CHECK(total / n == doctest::Approx(2.0).epsilon(0.03));

        const auto blocked = evaluate_asocial(ph(ones(10) + "0" + std::string(9, '?')), p, rng);
        CHECK_FALSE(blocked.success());
        CHECK(fitness_from_trials(blocked.trials_taken, p.fitness) == 20.0);
        CHECK(blocked.expressed_lengths.count(20) == 1000);

        CHECK(evaluate_asocial(ph(ones(20)), p, rng).trials_taken == std::optional<std::size_t>(0));
        CHECK_THROWS_AS(evaluate_asocial(ph("1~"), p, rng), StructuralPlasticUnsupported);
    }

    TEST_CASE("content resolution is uniform over all 2^k phenotypes") {
        Rng rng(4);
        for (std::size_t k = 1; k <= 4; ++k) {
            const auto phen = ph("1" + std::string(k, '?'));
            std::vector<long> counts(std::size_t{1} << k, 0);
            for (int i = 0; i < 16000; ++i) {
                const auto bits = resolve_content(phen, rng).bits;
                REQUIRE(bits.size() == k + 1);
                CHECK(bits[0] == '1');
                std::size_t index = 0;
                for (std::size_t j = 1; j <= k; ++j) index = index * 2 + (bits[j] == '1');
                ++counts[index];
            }
            CHECK(testing::chi_square_uniform(counts) < testing::chi_square_critical_999(counts.size() - 1));
        }
        CHECK_THROWS_AS(resolve_content(ph("~"), rng), StructuralPlasticUnsupported);
    }

    TEST_CASE("asocial trials are uniform over resolutions") {
        // with a target of length k the trial count is geometric with p = 2^-k
        Rng rng(5);
        for (std::size_t k = 1; k <= 4; ++k) {
            const auto p = with_trials(1, k);
            int hits = 0;
            const int n = 40000;
            for (int i = 0; i < n; ++i) hits += evaluate_asocial(ph(std::string(k, '?')), p, rng).success();
            const double q = 1.0 / double(1 << k);
            CHECK(std::abs(hits / double(n) - q) < 4 * std::sqrt(q * (1 - q) / n));
        }
    }

    TEST_CASE("a literal 0 rules out the target for every resolution") {
        // every phenome of length <= 6 over {0,1,?} holding a 0, against a target of its own length
        for (std::size_t len = 1; len <= 6; ++len) {
            std::size_t combos = 1;
            for (std::size_t i = 0; i < len; ++i) combos *= 3;
            for (std::size_t code = 0; code < combos; ++code) {
                std::string text;
                for (std::size_t c = code, i = 0; i < len; ++i, c /= 3) text += "01?"[c % 3];
                const auto p = with_trials(1u << len, len);
                std::vector<std::size_t> holes;
                for (std::size_t i = 0; i < len; ++i)
                    if (text[i] == '?') holes.push_back(i);
                bool perfect_exists = false;
                for (std::size_t mask = 0; mask < (std::size_t{1} << holes.size()); ++mask) {
                    std::string r = text;
                    for (std::size_t h = 0; h < holes.size(); ++h) r[holes[h]] = (mask >> h) & 1 ? '1' : '0';
                    perfect_exists = perfect_exists || is_perfect(r, p.fitness);
                }
                const bool has_zero = text.find('0') != std::string::npos;
                CHECK(perfect_exists == !has_zero);
                if (has_zero) {
                    Rng rng(code);
                    CHECK_FALSE(evaluate_asocial(ph(text), p, rng).success());
                }
            }
        }
    }

    TEST_CASE("structural expansion") {
        Rng rng(6);
        const auto plain = ph("10?1");
        CHECK(expand_structural(plain, rng) == plain);

        long emitted = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const auto out = expand_structural(ph("~"), rng);
            for (const auto& s : out.symbols) CHECK(s.kind == SymbolKind::plastic_content);
            emitted += static_cast<long>(out.size());
        }
        CHECK(emitted / double(n) == doctest::Approx(2.0).epsilon(0.02));

        for (int i = 0; i < 2000; ++i) {
            const auto out = expand_structural(ph("1~1~~"), rng, 8);
            CHECK(out.size() <= 8);
            CHECK(out.size() >= 5);
            CHECK(std::none_of(out.symbols.begin(), out.symbols.end(),
                               [](const Symbol& s) { return s.kind == SymbolKind::plastic_structural; }));
        }
    }

    TEST_CASE("plastic expansion") {
        const LearningParams p;
        Rng rng(7);
        CHECK_FALSE(evaluate_plastic_expansion(ph("0~"), p, rng).success());
        int found = 0;
        for (int i = 0; i < 100; ++i) found += evaluate_plastic_expansion(ph("~"), p, rng).success();
        CHECK(found == 0);

        // nineteen 1s then `~`: one emitted `?` resolving to 1 is the target, p = 1/4 per trial
        for (int i = 0; i < 50; ++i) {
            const auto rec = evaluate_plastic_expansion(ph(ones(19) + "~"), p, rng);
            REQUIRE(rec.success());
            check_record_invariants(rec, p);
            CHECK(rec.expressed_lengths.total() == *rec.trials_taken);
        }

        const auto failure = evaluate_plastic_expansion(ph("~"), p, rng);
        CHECK(failure.expressed_lengths.total() == 1000);
        check_record_invariants(failure, p);
        CHECK(failure.expressed_lengths.count(0) == 0);
    }

    TEST_CASE("tabu memory") {
        TabuMemory m;
        CHECK(m.empty());
        CHECK(m.insert("0101"));
        CHECK_FALSE(m.insert("0101"));
        CHECK(m.contains("0101"));
        CHECK_FALSE(m.contains("101"));
        CHECK_FALSE(m.contains("01010"));
        CHECK(m.insert(""));
        CHECK(m.contains(""));
        const std::string long_bits(200, '1');
        CHECK(m.insert(long_bits));
        CHECK(m.contains(long_bits));
        CHECK(m.size() == 3);
        m.clear();
        CHECK(m.empty());
        CHECK_FALSE(m.contains("0101"));
        CHECK_FALSE(m.contains(long_bits));

        // grows well past its initial table
        std::set<std::string> reference;
        Rng rng(8);
        for (int i = 0; i < 5000; ++i) {
            std::string s(1 + rng.below(40), '0');
            for (auto& c : s) c = rng.bit() ? '1' : '0';
            CHECK(m.insert(s) == reference.insert(s).second);
        }
        CHECK(m.size() == reference.size());
        for (const auto& s : reference) CHECK(m.contains(s));
    }

    TEST_CASE("tabulist explores both phenotypes of a single `?`") {
        const auto p = with_trials(2);
        TabuMemory memory;
        for (std::uint64_t seed = 0; seed < 500; ++seed) {
            Rng rng(seed);
            evaluate_tabulist(ph("?"), p, rng, memory);
            CHECK(memory.size() == 2);
            CHECK(memory.contains("0"));
            CHECK(memory.contains("1"));
        }
        // with a target of length 1 it is always found within two trials
        const auto p1 = with_trials(2, 1);
        for (std::uint64_t seed = 0; seed < 500; ++seed) {
            Rng rng(seed);
            const auto rec = evaluate_tabulist(ph("?"), p1, rng, memory);
            REQUIRE(rec.success());
            CHECK(*rec.trials_taken <= 2);
        }
    }

    TEST_CASE("tabulist accepts duplicates after the retry limit") {
        const auto p = with_trials(5);
        TabuMemory memory;
        Rng rng(9);
        const auto rec = evaluate_tabulist(ph("1011"), p, rng, memory);
        CHECK_FALSE(rec.success());
        CHECK(rec.duplicate_retries == 4 * 10);
        CHECK(rec.expressed_lengths.count(4) == 5);
        CHECK(memory.size() == 1);
    }

    TEST_CASE("tabulist memory is per evaluation") {
        const auto p = with_trials(1);
        TabuMemory memory;
        Rng rng(10);
        evaluate_tabulist(ph("1011"), p, rng, memory);
        const auto again = evaluate_tabulist(ph("1011"), p, rng, memory);
        CHECK(again.duplicate_retries == 0);
    }

    TEST_CASE("social expansion length") {
        SocialBoard board{5.0, 20, true};
        const auto out = social_expand(ph("1101~"), board, 5);
        CHECK(out.size() == 20);
        CHECK(std::count_if(out.symbols.begin(), out.symbols.end(),
                            [](const Symbol& s) { return s.kind == SymbolKind::plastic_content; }) == 16);

        board.mpl = 7;
        const auto same = social_expand(ph("1~0~"), board, 7);
        CHECK(same.text() == "1?0?");

        // extra `?`s dealt round-robin from the left
        board.mpl = 5;
        CHECK(social_expand(ph("~1~"), board, 0).text() == "????1???");
        board.mpl = 4;
        CHECK(social_expand(ph("~1~"), board, 0).text() == "???1???");

        const auto plain = ph("101");
        CHECK(social_expand(plain, board, 0) == plain);
    }

    TEST_CASE("social expansion identity PL' = PL + |MPL - IPL|") {
        Rng rng(11);
        for (int i = 0; i < 5000; ++i) {
            std::string text;
            const auto len = 1 + rng.below(12);
            for (std::size_t k = 0; k < len; ++k) text += "01?~"[rng.below(4)];
            if (text.find('~') == std::string::npos) text += '~';
            const SocialBoard board{1.0, rng.below(40), true};
            const auto ipl = rng.below(40);
            const std::size_t cap = 100;
            const auto out = social_expand(ph(text), board, ipl, cap);
            const std::size_t gap = board.mpl > ipl ? board.mpl - ipl : ipl - board.mpl;
            CHECK(out.size() == std::min(text.size() + gap, std::max(cap, text.size())));
            CHECK(out.text().find('~') == std::string::npos);
        }
        const SocialBoard far{1.0, 500, true};
        CHECK(social_expand(ph("1~"), far, 0, 100).size() == 100);
    }

    TEST_CASE("social learning") {
        const auto p = with_trials(1);
        SocialBoard board{5.0, 20, true};
        Rng rng(12);
        const auto first = evaluate_social(ph("1~"), p, rng, board);
        CHECK(first.max_expressed_length == 22);

        // an uninitialized board learns exactly as plastic expansion does
        const LearningParams full;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng a(seed), b(seed);
            const auto s = evaluate_social(ph("11~1?~"), full, a, SocialBoard{});
            const auto e = evaluate_plastic_expansion(ph("11~1?~"), full, b);
            CHECK(s.trials_taken == e.trials_taken);
            CHECK(s.expressed_lengths == e.expressed_lengths);
        }
    }

    TEST_CASE("board update") {
        SocialBoard board;
        CHECK_FALSE(board.initialized);
        board = board_update(board, 20.0, 3);
        CHECK(board.initialized);
        CHECK(board.mpl == 3);

        board = SocialBoard{5.0, 20, true};
        auto same = board_update(board, 6.0, 25);
        CHECK(same.best_fitness == 5.0);
        CHECK(same.mpl == 20);
        same = board_update(board, 5.0, 30);
        CHECK(same.mpl == 20);
        const auto better = board_update(board, 4.0, 18);
        CHECK(better.best_fitness == 4.0);
        CHECK(better.mpl == 18);
    }

    TEST_CASE("learning never alters the phenome") {
        const auto p = with_trials(50);
        TabuMemory memory;
        for (const auto* text : {"1?~0", "??~~", "1111", "~"}) {
            const auto original = ph(text);
            auto copy = original;
            Rng rng(13);
            evaluate_plastic_expansion(copy, p, rng);
            evaluate_tabulist(copy, p, rng, memory);
            evaluate_social(copy, p, rng, SocialBoard{2.0, 12, true});
            CHECK(copy == original);
        }
    }

    TEST_CASE("evaluations are deterministic per seed") {
        const LearningParams p;
        TabuMemory m1, m2;
        for (auto s : {Strategy::asocial, Strategy::plastic_expansion, Strategy::tabulist, Strategy::social}) {
            const auto phen = s == Strategy::asocial ? ph("1?1??") : ph("1?~1~");
            Rng a(14), b(14);
            const SocialBoard board{3.0, 9, true};
            const auto x = evaluate(s, phen, p, a, board, m1);
            const auto y = evaluate(s, phen, p, b, board, m2);
            CHECK(x.trials_taken == y.trials_taken);
            CHECK(x.best_phenotype == y.best_phenotype);
            CHECK(x.expressed_lengths == y.expressed_lengths);
        }
    }
}
