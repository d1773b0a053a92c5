#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace bellcanon;
using namespace bellcanon::testing;

TEST_CASE("scenario construction rejects degenerate inputs") {
    CHECK_THROWS_AS(scen({}), UserError);
    CHECK_THROWS_AS(scen({{2, 1}}), UserError); // one-outcome setting
    CHECK_THROWS_AS(scen({{}}), UserError);     // no settings
    CHECK_NOTHROW(scen({{2}}));
}

TEST_CASE("scenario text round trip") {
    CHECK(Scenario::parse("(2,2,2)") == Scenario::homogeneous(2, 2, 2));
    CHECK(Scenario::parse("[(3 2) (2 2 2)]") == scen({{3, 2}, {2, 2, 2}}));
    CHECK(Scenario::parse("[(2 3)(2 2 2)]") == scen({{2, 3}, {2, 2, 2}}));
    CHECK(Scenario::homogeneous(2, 2, 2).to_text() == "(2,2,2)");
    CHECK(scen({{3, 2}, {2, 2, 2}}).to_text() == "[(3 2) (2 2 2)]");
    Scenario s({{4, 2}, {3, 3}});
    CHECK(Scenario::parse(s.to_text()) == s);
    CHECK_THROWS_AS(Scenario::parse("(2,2"), UserError);
    CHECK_THROWS_AS(Scenario::parse("nonsense"), UserError);
}

TEST_CASE("canonical scenario ordering") {
    SUBCASE("settings sorted nonincreasing, parties lexicographic") {
        auto [canon, map] = canonical_scenario(scen({{2, 3}, {2, 2, 2}}));
        CHECK(canon == scen({{3, 2}, {2, 2, 2}}));
        CHECK(map.setting_to[0] == std::vector<int>{1, 0}); // Alice's settings swapped
        CHECK(map.party_to == std::vector<int>{0, 1});
    }
    SUBCASE("already canonical scenarios map to themselves") {
        auto [canon, map] = canonical_scenario(Scenario::homogeneous(2, 2, 2));
        CHECK(canon == Scenario::homogeneous(2, 2, 2));
        CHECK(map.is_identity());
    }
    SUBCASE("parties swap when the second dominates") {
        auto [canon, map] = canonical_scenario(scen({{2, 2}, {3, 3}}));
        CHECK(canon == scen({{3, 3}, {2, 2}}));
        CHECK(map.party_to == std::vector<int>{1, 0});
    }
    SUBCASE("padding: a shorter party with larger settings comes first") {
        // (3) vs (2 2): compare 3 > 2 at the first slot
        auto [canon, map] = canonical_scenario(scen({{2, 2}, {3}}));
        CHECK(canon == scen({{3}, {2, 2}}));
        // (2 2) vs (2): equal at slot one, 2 > 0 padding at slot two
        auto [canon2, map2] = canonical_scenario(scen({{2}, {2, 2}}));
        CHECK(canon2 == scen({{2, 2}, {2}}));
    }
}

TEST_CASE("canonical scenario is idempotent and reorder maps are consistent") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + (int)(rng() % 3);
        std::vector<Party> parties;
        for (int i = 0; i < n; ++i) {
            Party p(1 + rng() % 3);
            for (auto &k : p)
                k = 2 + (int)(rng() % 3);
            parties.push_back(p);
        }
        Scenario s(parties);
        auto [canon, map] = canonical_scenario(s);
        CHECK(canon.is_canonical());
        CHECK(map.apply(s) == canon);
        auto [canon2, map2] = canonical_scenario(canon);
        CHECK(canon2 == canon);
        CHECK(map2.is_identity());
        CHECK(map.inverse().apply(canon) == s);
        // dimension bookkeeping is invariant under reordering
        CHECK(canon.full_dimension() == s.full_dimension());
        CHECK(canon.ns_dimension() == s.ns_dimension());
    }
}

TEST_CASE("dimension formulas") {
    CHECK(Scenario::homogeneous(2, 2, 2).full_dimension() == 16);
    CHECK(scen({{3, 2}, {2, 2, 2}}).full_dimension() == 30);
    CHECK(scen({{2}}).full_dimension() == 2);

    CHECK(Scenario::homogeneous(2, 2, 2).ns_dimension() == 8);
    CHECK(scen({{3, 2}, {2, 2, 2}}).ns_dimension() == 15);
    CHECK(scen({{2}}).ns_dimension() == 1);
    CHECK(Scenario::homogeneous(3, 3, 3).full_dimension() == 729);
}

TEST_CASE("ns_dimension equals the rank of the normalized no-signaling constraints") {
    // brute-force oracle: span the affine space of local deterministic points
    // and count its dimension
    for (const Scenario &s :
         {scen({{3, 2}, {2, 2, 2}}), Scenario::homogeneous(2, 2, 2),
          scen({{2}})}) {
        long long d = s.full_dimension();
        std::vector<std::vector<Rat>> basis;
        std::vector<long long> pivots;
        std::vector<Rat> origin;
        long long strategies = 1;
        for (int i = 0; i < s.party_count(); ++i)
            for (int j = 0; j < s.setting_count(i); ++j)
                strategies *= s.outcome_count(i, j);
        for (long long id = 0; id < strategies; ++id) {
            std::vector<std::vector<int>> pick(s.party_count());
            long long rem = id;
            for (int i = 0; i < s.party_count(); ++i) {
                pick[i].resize(s.setting_count(i));
                for (int j = 0; j < s.setting_count(i); ++j) {
                    pick[i][j] = (int)(rem % s.outcome_count(i, j));
                    rem /= s.outcome_count(i, j);
                }
            }
            std::vector<Rat> row = deterministic_point(s, pick).p;
            if (origin.empty()) {
                origin = row;
                continue;
            }
            for (long long c = 0; c < d; ++c)
                row[c] -= origin[c];
            for (size_t r = 0; r < basis.size(); ++r) {
                if (row[pivots[r]] == 0)
                    continue;
                Rat f = row[pivots[r]] / basis[r][pivots[r]];
                for (long long c = 0; c < d; ++c)
                    row[c] -= f * basis[r][c];
            }
            for (long long c = 0; c < d; ++c)
                if (row[c] != 0) {
                    pivots.push_back(c);
                    basis.push_back(row);
                    break;
                }
        }
        CHECK((long long)basis.size() == s.ns_dimension());
    }
}
