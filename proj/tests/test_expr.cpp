#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace bellcanon;
using namespace bellcanon::testing;

TEST_CASE("coefficient enumeration: party 1 outcome fastest, then its setting") {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    CHECK(index_of(IndexTuple{{{1, 1}, {1, 1}}}, s) == 1);
    CHECK(index_of(IndexTuple{{{2, 1}, {1, 1}}}, s) == 2);
    CHECK(index_of(IndexTuple{{{1, 2}, {1, 1}}}, s) == 3);
    CHECK(index_of(IndexTuple{{{2, 2}, {1, 1}}}, s) == 4);
    CHECK(index_of(IndexTuple{{{1, 1}, {2, 1}}}, s) == 5);
    CHECK(index_of(IndexTuple{{{1, 1}, {1, 2}}}, s) == 9);
    CHECK_THROWS_AS(index_of(IndexTuple{{{3, 1}, {1, 1}}}, s), UserError);
    CHECK_THROWS_AS(index_of(IndexTuple{{{1, 3}, {1, 1}}}, s), UserError);
}

TEST_CASE("index_of and tuple_of are mutually inverse") {
    for (const Scenario &s : {Scenario::homogeneous(2, 2, 2),
                              scen({{3, 2}, {2, 2, 2}}), scen({{4, 2, 2}})}) {
        for (long long i = 1; i <= s.full_dimension(); ++i) {
            IndexTuple t = tuple_of(i, s);
            CHECK(index_of(t, s) == i);
        }
    }
}

TEST_CASE("evaluate on deterministic and no-signaling points") {
    BellExpression chsh = chsh_expression();
    SUBCASE("all-ones deterministic point gives 2") {
        // direct summation oracle: both parties always answer outcome 1
        Rat expected = 0;
        for (int x = 1; x <= 2; ++x)
            for (int y = 1; y <= 2; ++y)
                expected += ((1 + 1 + x * (y + 1)) % 2 == 0) ? rat(1) : rat(-1);
        CHECK(expected == 2);
        CorrelationPoint p = deterministic_point(chsh.scenario, {{0, 0}, {0, 0}});
        CHECK(evaluate(chsh, p) == 2);
    }
    SUBCASE("the box saturating the no-signaling bound gives 4") {
        // P(ab|xy) = 1/2 iff a+b = x(y+1) mod 2: weight sits exactly on the
        // +1 coefficients, so direct summation gives 4
        std::vector<Rat> p(16);
        Scenario s = chsh.scenario;
        for (long long i = 1; i <= 16; ++i) {
            IndexTuple t = tuple_of(i, s);
            int a = t.parts[0].outcome, x = t.parts[0].setting;
            int b = t.parts[1].outcome, y = t.parts[1].setting;
            if ((a + b) % 2 == (x * (y + 1)) % 2)
                p[i - 1] = rat(1, 2);
        }
        CorrelationPoint box(s, p);
        CHECK(evaluate(chsh, box) == 4);
    }
    SUBCASE("zero expression evaluates to zero everywhere") {
        std::mt19937_64 rng(3);
        BellExpression zero = BellExpression::zero(chsh.scenario);
        CHECK(evaluate(zero, random_local_point(chsh.scenario, rng)) == 0);
    }
    SUBCASE("scenario mismatch is an error") {
        CorrelationPoint p = deterministic_point(scen({{2}}), {{0}});
        CHECK_THROWS_AS(evaluate(chsh, p), UserError);
    }
}

TEST_CASE("evaluate is bilinear") {
    std::mt19937_64 rng(11);
    Scenario s({{3, 2}, {2, 2}});
    BellExpression e1 = random_rational_expression(s, rng);
    BellExpression e2 = random_rational_expression(s, rng);
    CorrelationPoint p = random_local_point(s, rng);
    BellExpression sum = e1;
    for (size_t i = 0; i < sum.coeff.size(); ++i)
        sum.coeff[i] += rat(3) * e2.coeff[i];
    CHECK(evaluate(sum, p) == evaluate(e1, p) + rat(3) * evaluate(e2, p));
}

TEST_CASE("negate") {
    OrientedExpression ch{ch_expression(), {{"local", {rat(0), true}}}};
    OrientedExpression neg = negate(ch);
    for (size_t i = 0; i < neg.expr.coeff.size(); ++i)
        CHECK(neg.expr.coeff[i] == -ch.expr.coeff[i]);
    CHECK(neg.bounds.empty());
    CHECK(negate(negate(ch)).expr == ch.expr);
    BellExpression zero = BellExpression::zero(ch.expr.scenario);
    CHECK(negate(zero) == zero);
}

TEST_CASE("tensor product") {
    BellExpression chsh = chsh_expression();
    SUBCASE("product points multiply expression values") {
        std::mt19937_64 rng(5);
        BellExpression e1 = random_rational_expression(scen({{2, 2}}), rng);
        BellExpression e2 = random_rational_expression(scen({{3}, {2, 2}}), rng);
        CorrelationPoint p1 = random_local_point(e1.scenario, rng);
        CorrelationPoint p2 = random_local_point(e2.scenario, rng);
        CHECK(evaluate(tensor(e1, e2), tensor(p1, p2)) ==
              evaluate(e1, p1) * evaluate(e2, p2));
    }
    SUBCASE("tensor with a single-party all-ones expression replicates coefficients") {
        BellExpression ones(scen({{2}}), {rat(1), rat(1)});
        BellExpression prod = tensor(chsh, ones);
        for (long long i = 1; i <= prod.scenario.full_dimension(); ++i) {
            IndexTuple t = tuple_of(i, prod.scenario);
            IndexTuple head{{t.parts[0], t.parts[1]}};
            CHECK(prod.coeff[i - 1] == chsh.at(head));
        }
    }
    SUBCASE("chsh (x) chsh has local bound 4") {
        CHECK(local_bound(tensor(chsh, chsh)) == 4);
    }
}

TEST_CASE("reorder carries coefficients along the scenario map") {
    std::mt19937_64 rng(13);
    Scenario s({{2, 3}, {2, 2, 2}});
    BellExpression e = random_rational_expression(s, rng);
    auto [canon, map] = canonical_scenario(s);
    BellExpression r = reorder(e, map);
    CHECK(r.scenario == canon);
    // spot-check one tuple: Alice's settings swap
    IndexTuple t{{{1, 2}, {2, 3}}}; // outcome 1 of setting 2, outcome 2 of setting 3
    IndexTuple u{{{1, 1}, {2, 3}}};
    CHECK(r.at(u) == e.at(t));
    CHECK(reorder(r, map.inverse()) == e);
}
