#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace bellcanon;
using namespace bellcanon::testing;

TEST_CASE("relabeling group of (2,2,2)") {
    GeneratorSet g = relabeling_group(Scenario::homogeneous(2, 2, 2));
    CHECK(g.gens.size() == 7); // 1 party + 2 setting + 4 outcome swaps
    CHECK(g.order == 128);     // 2! (2!)^2 (2!)^4
    CHECK(enumerate_group(g.gens, 16).size() == 128);
}

TEST_CASE("relabeling group of a non-homogeneous scenario") {
    // no party swap, no swap between Alice's unequal settings; Bob's two
    // adjacent setting swaps plus six outcome swaps
    GeneratorSet g = relabeling_group(scen({{3, 2}, {2, 2, 2}}));
    CHECK(g.gens.size() == 8);
    CHECK(g.order == 576); // 3! * 2 * 2^3 * 3!
    CHECK(enumerate_group(g.gens, 30).size() == 576);
}

TEST_CASE("relabeling group of a single binary setting") {
    GeneratorSet g = relabeling_group(scen({{2}}));
    CHECK(g.gens.size() == 1);
    CHECK(g.order == 2);
}

TEST_CASE("relabeling group requires a canonical scenario") {
    CHECK_THROWS_AS(relabeling_group(scen({{2, 3}})), UserError);
    CHECK_THROWS_AS(relabeling_group(scen({{2, 2}, {3, 3}})), UserError);
}

TEST_CASE("group order formula matches exhaustive enumeration for small scenarios") {
    std::vector<Scenario> scenarios;
    for (int n = 1; n <= 3; ++n) {
        // enumerate canonical scenarios with small parties and D <= 36
        std::vector<Party> parties_pool = {{2},    {3},    {4},    {2, 2}, {3, 2},
                                           {3, 3}, {4, 2}, {2, 2, 2}};
        std::vector<std::vector<int>> picks;
        std::vector<int> idx(n, 0);
        for (;;) {
            std::vector<Party> candidate;
            for (int i : idx)
                candidate.push_back(parties_pool[i]);
            Scenario s(candidate);
            if (s.is_canonical() && s.full_dimension() <= 36)
                scenarios.push_back(s);
            int i = n - 1;
            while (i >= 0 && ++idx[i] == (int)parties_pool.size())
                idx[i--] = 0;
            if (i < 0)
                break;
        }
    }
    CHECK(scenarios.size() > 10);
    for (const Scenario &s : scenarios) {
        GeneratorSet g = relabeling_group(s);
        CAPTURE(s.to_text());
        CHECK(Int((long)enumerate_group(g.gens, (int)s.full_dimension()).size()) ==
              g.order);
        StabilizerChain chain =
            build_chain(g.gens, g.order, (int)s.full_dimension());
        CHECK(chain.order() == g.order);
    }
}

TEST_CASE("randomized chain construction agrees with the deterministic one") {
    Scenario s = Scenario::homogeneous(2, 3, 2);
    GeneratorSet g = relabeling_group(s);
    StabilizerChain det = build_chain(g.gens, g.order, 36);
    StabilizerChain rnd = build_chain(g.gens, g.order, 36, {.randomized = true});
    CHECK(det.order() == g.order);
    CHECK(rnd.order() == g.order);
}

TEST_CASE("a wrong claimed order is detected, never silently accepted") {
    GeneratorSet g = relabeling_group(Scenario::homogeneous(2, 2, 2));
    CHECK_THROWS_AS(build_chain(g.gens, Int(127), 16), InternalError);
    CHECK_THROWS_AS(build_chain(g.gens, g.order * 2, 16), InternalError);
}

TEST_CASE("chain decomposes every generated element") {
    Scenario s = scen({{3, 2}, {2, 2}});
    GeneratorSet g = relabeling_group(s);
    StabilizerChain chain = build_chain(g.gens, g.order, (int)s.full_dimension());
    for (const Perm &el : enumerate_group(g.gens, (int)s.full_dimension()))
        CHECK(chain.contains(el));
    // a transposition of two points is generally not a relabeling
    Perm odd = Perm::identity((int)s.full_dimension());
    std::swap(odd.img[0], odd.img[5]);
    CHECK(!chain.contains(odd));
    // the trivial group has an empty chain
    StabilizerChain trivial = build_chain({}, 1, 8);
    CHECK(trivial.levels.empty());
    CHECK(trivial.order() == 1);
}

TEST_CASE("act implements the right action on coefficients") {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    BellExpression chsh = chsh_expression();
    GeneratorSet gr = relabeling_group(s);
    SUBCASE("identity") { CHECK(act(Perm::identity(16), chsh) == chsh); }
    SUBCASE("composition law") {
        std::mt19937_64 rng(31);
        std::vector<Perm> elements(gr.gens.begin(), gr.gens.end());
        for (int t = 0; t < 10; ++t) {
            const Perm &g = elements[rng() % elements.size()];
            const Perm &h = elements[rng() % elements.size()];
            BellExpression e = random_expression(s, rng);
            CHECK(act(h, act(g, e)) == act(mul(g, h), e));
        }
    }
    SUBCASE("relabelings preserve the local bound") {
        // swapping Bob's outcomes of one setting gives another CHSH version
        Relabeling r = Relabeling::identity(s);
        std::swap(r.outcome_to[1][0][0], r.outcome_to[1][0][1]);
        BellExpression moved = act(r.to_perm(s), chsh);
        CHECK(moved.coeff != chsh.coeff);
        CHECK(local_bound(moved) == 2);
        CHECK(local_bound_serial(moved) == 2);
    }
}

TEST_CASE("lex_min of the CHSH orbit") {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    ScenarioGroup group(s);
    BellExpression chsh = chsh_expression();
    auto orbit = enumerate_orbit(chsh, group.generators().gens);
    REQUIRE(orbit.size() == 8);
    LexMinResult min = lex_min(chsh, group);
    CHECK(min.minimal == orbit.front());
    for (const BellExpression &rep : orbit) {
        LexMinResult m = lex_min(rep, group);
        CHECK(m.minimal == orbit.front());
        CHECK(act(m.witness, rep) == m.minimal);
    }
    // running lex_min on its own output returns it with the identity witness
    LexMinResult again = lex_min(min.minimal, group);
    CHECK(again.minimal == min.minimal);
    CHECK(again.witness.is_identity());
}

TEST_CASE("lex_min equals the brute-force orbit minimum") {
    std::mt19937_64 rng(37);
    for (const Scenario &s :
         {Scenario::homogeneous(2, 2, 2), scen({{3, 2}, {2, 2}})}) {
        ScenarioGroup group(s);
        for (int trial = 0; trial < 25; ++trial) {
            BellExpression e = random_expression(s, rng, -3, 3);
            auto orbit = enumerate_orbit(e, group.generators().gens);
            LexMinResult matrix = lex_min(e, group);
            LexMinResult filter =
                lex_min(e, group, {.algorithm = LexMinAlgorithm::PointFilter});
            CHECK(matrix.minimal == orbit.front());
            CHECK(filter.minimal == orbit.front());
            CHECK(act(matrix.witness, e) == matrix.minimal);
            CHECK(act(filter.witness, e) == filter.minimal);
        }
    }
}

TEST_CASE("lex_min is constant on orbits") {
    std::mt19937_64 rng(41);
    Scenario s = Scenario::homogeneous(2, 2, 2);
    ScenarioGroup group(s);
    auto elements = enumerate_group(group.generators().gens, 16);
    std::vector<Perm> all(elements.begin(), elements.end());
    for (int trial = 0; trial < 10; ++trial) {
        BellExpression e = random_expression(s, rng);
        BellExpression moved = act(all[rng() % all.size()], e);
        CHECK(lex_min(e, group).minimal == lex_min(moved, group).minimal);
    }
}

TEST_CASE("serial and parallel lex_min agree") {
    std::mt19937_64 rng(43);
    Scenario s = Scenario::homogeneous(2, 2, 2);
    ScenarioGroup group(s);
    for (int trial = 0; trial < 5; ++trial) {
        BellExpression e = random_expression(s, rng);
        LexMinResult par = lex_min(e, group, {.parallel = true});
        LexMinResult ser = lex_min(e, group, {.parallel = false});
        CHECK(par.minimal == ser.minimal);
        CHECK(par.witness == ser.witness);
    }
}

TEST_CASE("orbit sizes") {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    ScenarioGroup group(s);
    SUBCASE("CHSH has eight representatives") {
        CHECK(orbit_size(chsh_expression(), group) == 8);
    }
    SUBCASE("a constant vector is fixed by the whole group") {
        BellExpression c(s, std::vector<Rat>(16, rat(3)));
        CHECK(orbit_size(c, group) == 1);
    }
    SUBCASE("a vector with all-distinct entries has a full orbit") {
        std::vector<Rat> c(16);
        for (int i = 0; i < 16; ++i)
            c[i] = rat(i);
        CHECK(orbit_size(BellExpression(s, c), group) == 128);
    }
    SUBCASE("orbit size equals the enumerated orbit for random vectors") {
        std::mt19937_64 rng(47);
        for (int trial = 0; trial < 10; ++trial) {
            BellExpression e = random_expression(s, rng, -2, 2);
            auto orbit = enumerate_orbit(e, group.generators().gens);
            CHECK(orbit_size(e, group) == Int((long)orbit.size()));
        }
    }
}

TEST_CASE("rank and unrank walk the sorted orbit") {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    ScenarioGroup group(s);
    BellExpression chsh = chsh_expression();
    auto orbit = enumerate_orbit(chsh, group.generators().gens);
    REQUIRE(orbit.size() == 8);
    BellExpression min_rep = orbit.front();
    CHECK(rank_of(min_rep, group) == 1);
    for (size_t r = 0; r < orbit.size(); ++r) {
        CHECK(rank_of(orbit[r], group) == Int((long)(r + 1)));
        CHECK(unrank(min_rep, Int((long)(r + 1)), group) == orbit[r]);
    }
    CHECK_THROWS_AS(unrank(min_rep, Int(9), group), UserError);
    CHECK_THROWS_AS(unrank(min_rep, Int(0), group), UserError);
    CHECK_THROWS_AS(unrank(orbit[3], Int(1), group), UserError); // not minimal
}

TEST_CASE("rank and unrank on random orbits") {
    std::mt19937_64 rng(53);
    for (const Scenario &s :
         {Scenario::homogeneous(2, 2, 2), scen({{3, 2}, {2, 2}})}) {
        ScenarioGroup group(s);
        for (int trial = 0; trial < 5; ++trial) {
            BellExpression e = random_expression(s, rng, -2, 2);
            auto orbit = enumerate_orbit(e, group.generators().gens);
            for (size_t step = 0; step < orbit.size(); step += std::max<size_t>(1, orbit.size() / 7)) {
                CHECK(rank_of(orbit[step], group) == Int((long)(step + 1)));
                CHECK(unrank(orbit.front(), Int((long)(step + 1)), group) == orbit[step]);
            }
        }
    }
}

TEST_CASE("coloring stabilizer matches brute force") {
    std::mt19937_64 rng(59);
    Scenario s = scen({{3, 2}, {2, 2}});
    GeneratorSet g = relabeling_group(s);
    StabilizerChain chain = build_chain(g.gens, g.order, (int)s.full_dimension());
    auto elements = enumerate_group(g.gens, (int)s.full_dimension());
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<int> color(s.full_dimension());
        int palette = 1 + (int)(rng() % 4);
        for (auto &c : color)
            c = (int)(rng() % palette);
        long expected = 0;
        for (const Perm &el : elements) {
            bool keep = true;
            for (int i = 0; i < el.size() && keep; ++i)
                keep = color[el[i]] == color[i];
            expected += keep;
        }
        StabilizerChain stab = coloring_stabilizer(chain, 0, color);
        CHECK(stab.order() == Int(expected));
    }
}

TEST_CASE("row coloring stabilizer matches brute force") {
    std::mt19937_64 rng(61);
    for (const Party &p : {Party{3, 2, 2}, Party{2, 2}, Party{3, 3}, Party{4}}) {
        Scenario s = scen({p});
        GeneratorSet full = relabeling_group(s);
        auto elements = enumerate_group(full.gens, (int)s.full_dimension());
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<int> color(s.full_dimension());
            for (auto &c : color)
                c = (int)(rng() % 3);
            long expected = 0;
            for (const Perm &el : elements) {
                bool keep = true;
                for (int i = 0; i < el.size() && keep; ++i)
                    keep = color[el[i]] == color[i];
                expected += keep;
            }
            GeneratorSet stab = party_coloring_stabilizer(p, color);
            CHECK(stab.order == Int(expected));
            CHECK(Int((long)enumerate_group(stab.gens, (int)s.full_dimension()).size()) ==
                  stab.order);
        }
    }
}
