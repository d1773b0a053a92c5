#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace bellcanon;
using namespace bellcanon::testing;

namespace {

BellExpression positivity_lifted_22() {
    // -P(1|1) written in a two-setting party: one irrelevant input
    BellExpression e = BellExpression::zero(scen({{2, 2}}));
    e.coeff[0] = rat(-1);
    return e;
}

BellExpression positivity_canonical() {
    // the reduced, projected, rescaled form of -P(1|1): coefficients (-1, 1)
    return expr_of(scen({{2}}), {-1, 1});
}

BellExpression sliwa4_class_fixture() {
    // composition of a lifted positivity and CHSH in (3,2,2)
    return tensor(positivity_lifted_22(), chsh_expression());
}

BellExpression canonical_chsh() {
    ScenarioGroup group(Scenario::homogeneous(2, 2, 2));
    return lex_min(chsh_expression(), group).minimal;
}

// random element supported on signaling directions plus a constant: invisible
// on the no-signaling subspace
BellExpression random_ns_junk(const Scenario &s, std::mt19937_64 &rng) {
    SymmetricTensor t{s, std::vector<Rat>(s.full_dimension())};
    std::vector<PartyBasis> bases;
    for (int i = 0; i < s.party_count(); ++i)
        bases.push_back(party_basis(s.party(i)));
    for (long long idx = 0; idx < s.full_dimension(); ++idx) {
        long long rem = idx;
        bool nu = false;
        for (int i = 0; i < s.party_count(); ++i) {
            int digit = (int)(rem % s.party_dim(i));
            rem /= s.party_dim(i);
            if (bases[i].is_nu(digit))
                nu = true;
        }
        if ((nu || idx == 0) && rng() % 2)
            t.gamma[idx] = rat((long)(rng() % 9) - 4, 1 + rng() % 2);
    }
    return from_symmetric(t);
}

} // namespace

TEST_CASE("remove_superfluous reduces the lifted positivity example") {
    // 3P(1|1) - P(2|1) + P(1|2) + P(2|2) >= 0, i.e. its negation bounded by 0
    Scenario s = scen({{2, 2}});
    BellExpression e = expr_of(s, {-3, 1, -1, -1});
    auto [tp, bound] = project(to_symmetric(e), rat(0));
    CHECK(bound == 2);
    auto [reduced, report] = remove_superfluous(from_symmetric(tp));
    CHECK(reduced.scenario == scen({{2}}));
    CHECK_FALSE(report.empty());
    auto norm = normalize_integer(reduced, bound);
    CHECK(norm.expr == positivity_canonical());
    CHECK(norm.bound == 1);
    // and -P(1|1) <= 0 itself reduces to the same canonical form
    auto [tp2, bound2] = project(to_symmetric(positivity_lifted_22()), rat(0));
    auto [reduced2, report2] = remove_superfluous(from_symmetric(tp2));
    CHECK(normalize_integer(reduced2, bound2).expr == positivity_canonical());
}

TEST_CASE("remove_superfluous leaves CHSH untouched") {
    auto [reduced, report] = remove_superfluous(chsh_expression());
    CHECK(report.empty());
    CHECK(reduced == chsh_expression());
}

TEST_CASE("a party tensored in as a constant is removed") {
    BellExpression ones(scen({{2}}), {rat(1), rat(1)});
    BellExpression e = tensor(chsh_expression(), ones);
    auto [tp, bound] = project(to_symmetric(e), rat(2));
    auto [reduced, report] = remove_superfluous(from_symmetric(tp));
    CHECK(reduced.scenario == Scenario::homogeneous(2, 2, 2));
    CHECK(reduced == chsh_expression());
    bool saw_party = false;
    for (const auto &step : report.steps)
        if (std::holds_alternative<RemovedParty>(step))
            saw_party = true;
    CHECK(saw_party);
}

TEST_CASE("duplicate outcome distinctions merge to the lowest label") {
    // positivity on a three-outcome setting with outcomes 2 and 3 playing
    // the same role
    Scenario s = scen({{3}});
    BellExpression e = expr_of(s, {-1, 0, 0});
    auto [tp, bound] = project(to_symmetric(e), rat(0));
    auto [reduced, report] = remove_superfluous(from_symmetric(tp));
    CHECK(reduced.scenario == scen({{2}}));
    CHECK(normalize_integer(reduced, bound).expr == positivity_canonical());
    bool saw_merge = false;
    for (const auto &step : report.steps)
        if (const auto *m = std::get_if<MergedOutcomes>(&step)) {
            saw_merge = true;
            CHECK(m->kept < m->removed);
        }
    CHECK(saw_merge);
}

TEST_CASE("remove_superfluous flags constants and rejects unprojected input") {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    auto [reduced, report] = remove_superfluous(BellExpression::zero(s));
    CHECK(report.constant);
    BellExpression e = expr_of(scen({{2, 2}}), {-3, 1, -1, -1});
    CHECK_THROWS_AS(remove_superfluous(e), UserError); // not projected
}

TEST_CASE("relift undoes remove_superfluous exactly") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 30; ++trial) {
        // build expressions with planted degeneracies: lifted positivity
        // blocks tensored with random projected parts
        Scenario base({{2, 2}, {2, 2}});
        BellExpression e = random_expression(base, rng, -2, 2);
        BellExpression proj = from_symmetric(project(to_symmetric(e), rat(0)).first);
        if (to_symmetric(proj).gamma == std::vector<Rat>(base.full_dimension()))
            continue;
        auto [reduced, report] = remove_superfluous(proj);
        CHECK(relift(reduced, report) == proj);
    }
}

TEST_CASE("split_composite on the joint-plus-marginals example") {
    // P_A(1|1) + P_B(1|1) + P_AB(11|11) becomes a product after adding 1
    Scenario s({{2}, {2}});
    BellExpression e = expr_of(s, {3, 1, 1, 0});
    auto split = split_composite(e);
    REQUIRE(split.has_value());
    CHECK(split->kappa == 1);
    CHECK(split->factor_a == expr_of(scen({{2}}), {2, 1}));
    CHECK(split->factor_b == expr_of(scen({{2}}), {2, 1}));
}

TEST_CASE("CHSH is not composite") {
    CHECK_FALSE(split_composite(chsh_expression()).has_value());
}

TEST_CASE("a tensor of two CHSH copies splits with no constant") {
    BellExpression e = tensor(chsh_expression(), chsh_expression());
    auto split = split_composite(e);
    REQUIRE(split.has_value());
    CHECK(split->kappa == 0);
    CHECK(split->parties_a == std::vector<int>{0, 1});
    CHECK(split->parties_b == std::vector<int>{2, 3});
    ScenarioGroup group(Scenario::homogeneous(2, 2, 2));
    CHECK(lex_min(split->factor_a, group).minimal == canonical_chsh());
    CHECK(lex_min(split->factor_b, group).minimal == canonical_chsh());
}

TEST_CASE("split sign convention is coherent under joint negation") {
    Scenario s({{2}, {2}});
    BellExpression e = expr_of(s, {3, 1, 1, 0});
    auto split = split_composite(e);
    REQUIRE(split.has_value());
    // the same expression built from both factors negated splits identically
    BellExpression neg_prod = tensor(expr_of(scen({{2}}), {-2, -1}),
                                     expr_of(scen({{2}}), {-2, -1}));
    BellExpression e2 = neg_prod;
    // subtract kappa * unit: unit on two single-setting parties is all ones
    for (auto &c : e2.coeff)
        c -= rat(1);
    CHECK(e2 == e);
    auto split2 = split_composite(e2);
    REQUIRE(split2.has_value());
    CHECK(split2->factor_a == split->factor_a);
    CHECK(split2->factor_b == split->factor_b);
    CHECK(split2->kappa == split->kappa);
}

TEST_CASE("decompose CH yields a single CHSH leaf with bound 2") {
    OrientedExpression ch{ch_expression(), {{"local", {rat(0), true}}}};
    DecompositionTree tree = decompose(ch);
    REQUIRE(tree.is_leaf());
    const Leaf &leaf = tree.leaf();
    CHECK(leaf.canonical.expr == canonical_chsh());
    CHECK(leaf.scale == 4);
    CHECK(leaf.shift == rat(-1, 2));
    CHECK(leaf.sign == 1);
    CHECK(leaf.orbit_rank >= 1);
    REQUIRE(leaf.canonical.bounds.count("local"));
    CHECK(leaf.canonical.bounds.at("local").value == 2);
    // CHSH itself decomposes to the identical canonical leaf
    DecompositionTree tree2 = decompose(OrientedExpression{chsh_expression(), {}});
    CHECK(tree2.leaf().canonical.expr == leaf.canonical.expr);
}

TEST_CASE("decompose the three-party composite fixture") {
    OrientedExpression oe{sliwa4_class_fixture(), {}};
    DecompositionTree tree = decompose(oe);
    REQUIRE_FALSE(tree.is_leaf());
    auto leaves = tree.leaves();
    REQUIRE(leaves.size() == 2);
    std::vector<BellExpression> canon;
    for (const Leaf *l : leaves)
        canon.push_back(l->canonical.expr);
    bool found_pos = false, found_chsh = false;
    for (const auto &c : canon) {
        if (c == positivity_canonical())
            found_pos = true;
        if (c == canonical_chsh())
            found_chsh = true;
    }
    CHECK(found_pos);
    CHECK(found_chsh);
    CHECK(recompose(tree) == ns_representative(oe.expr));
}

TEST_CASE("decompose rejects constants") {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    BellExpression constant(s, std::vector<Rat>(16, rat(1, 4)));
    CHECK_THROWS_AS(decompose(OrientedExpression{constant, {}}),
                    TrivialExpressionError);
}

TEST_CASE("recompose inverts decompose") {
    std::mt19937_64 rng(71);
    std::vector<Scenario> scenarios = {Scenario::homogeneous(2, 2, 2),
                                       scen({{3, 2}, {2, 2}}), scen({{2, 2}, {2}, {2}}),
                                       scen({{4, 3}, {3, 2}})};
    for (int trial = 0; trial < 40; ++trial) {
        const Scenario &s = scenarios[trial % scenarios.size()];
        BellExpression e = random_rational_expression(s, rng);
        OrientedExpression oe{e, {}};
        try {
            DecompositionTree tree = decompose(oe);
            CHECK(recompose(tree) == ns_representative(e));
        } catch (const TrivialExpressionError &) {
        }
        // already projected expressions recompose to themselves literally
        BellExpression p = ns_representative(e);
        try {
            DecompositionTree tree = decompose(OrientedExpression{p, {}});
            CHECK(recompose(tree) == p);
        } catch (const TrivialExpressionError &) {
        }
    }
}

TEST_CASE("decompose is invariant under relabelings and no-signaling junk") {
    std::mt19937_64 rng(73);
    Scenario s = Scenario::homogeneous(2, 2, 2);
    ScenarioGroup group(s);
    auto elements = enumerate_group(group.generators().gens, 16);
    std::vector<Perm> all(elements.begin(), elements.end());
    for (int trial = 0; trial < 8; ++trial) {
        BellExpression e = random_expression(s, rng, -3, 3);
        DecompositionTree base;
        try {
            base = decompose(OrientedExpression{e, {}});
        } catch (const TrivialExpressionError &) {
            continue;
        }
        auto keys = [](const DecompositionTree &t) {
            std::vector<std::vector<Rat>> out;
            for (const Leaf *l : t.leaves())
                out.push_back(l->canonical.expr.coeff);
            std::sort(out.begin(), out.end());
            return out;
        };
        // random relabeling
        BellExpression moved = act(all[rng() % all.size()], e);
        CHECK(keys(decompose(OrientedExpression{moved, {}})) == keys(base));
        // signaling junk, a constant, and a positive rescaling
        BellExpression junk = random_ns_junk(s, rng);
        BellExpression shifted = e;
        for (size_t i = 0; i < shifted.coeff.size(); ++i)
            shifted.coeff[i] = rat(3, 2) * shifted.coeff[i] + junk.coeff[i];
        CHECK(keys(decompose(OrientedExpression{shifted, {}})) == keys(base));
    }
}

TEST_CASE("compose_bounds") {
    SUBCASE("two CHSH factors give the known product bound") {
        TwoSidedBound chsh{rat(-2), rat(2), true};
        ComposedBound out = compose_bounds(chsh, chsh, rat(0));
        CHECK(out.upper == 4);
        CHECK(out.lower == -4);
    }
    SUBCASE("asymmetric bounds") {
        ComposedBound out = compose_bounds({rat(1), rat(2), true},
                                           {rat(3), rat(4), true}, rat(0));
        CHECK(out.upper == 8);
        CHECK(out.lower == 3);
    }
    SUBCASE("the constant shifts both sides") {
        ComposedBound out = compose_bounds({rat(1), rat(2), true},
                                           {rat(3), rat(4), true}, rat(5));
        CHECK(out.upper == 13);
        CHECK(out.lower == 8);
    }
    SUBCASE("missing lower bound") {
        TwoSidedBound no_lower{std::nullopt, rat(2), true};
        CHECK_THROWS_AS(compose_bounds(no_lower, {rat(-2), rat(2), true}, rat(0)),
                        UserError);
    }
    SUBCASE("non-conditional sets are refused") {
        TwoSidedBound sv{rat(-4), rat(4), false};
        CHECK_THROWS_AS(compose_bounds(sv, sv, rat(0)), UserError);
    }
}

TEST_CASE("composed bounds match the strategy oracle on random products") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 10; ++trial) {
        BellExpression fa = random_expression(scen({{2, 2}}), rng, -3, 3);
        BellExpression fb = random_expression(scen({{2}, {2}}), rng, -3, 3);
        for (int signs = 0; signs < 4; ++signs) {
            BellExpression a = (signs & 1) ? negate(fa) : fa;
            BellExpression b = (signs & 2) ? negate(fb) : fb;
            TwoSidedBound ba{-local_bound(negate(a)), local_bound(a), true};
            TwoSidedBound bb{-local_bound(negate(b)), local_bound(b), true};
            ComposedBound c = compose_bounds(ba, bb, rat(0));
            BellExpression prod = tensor(a, b);
            CHECK(c.upper == local_bound(prod));
            CHECK(c.lower == -local_bound(negate(prod)));
        }
    }
}

TEST_CASE("local bounds of the named expressions") {
    CHECK(local_bound(chsh_expression()) == 2);
    CHECK(local_bound(ch_expression()) == 0);
    CHECK(local_bound(tensor(chsh_expression(), chsh_expression())) == 4);
    CHECK(local_bound_serial(chsh_expression()) == 2);
    CHECK_THROWS_AS(local_bound(chsh_expression(), 8), UserError); // cap
}

TEST_CASE("facet certification") {
    SUBCASE("CHSH is a facet of the (2,2,2) local polytope") {
        CHECK(facet_check(chsh_expression(), rat(2)));
    }
    SUBCASE("positivity lifted to (2,2,2) is a facet") {
        BellExpression pos = BellExpression::zero(Scenario::homogeneous(2, 2, 2));
        pos.coeff[0] = rat(-1); // -P(11|11)
        CHECK(facet_check(pos, rat(0)));
    }
    SUBCASE("wrong bound is rejected") {
        CHECK_THROWS_AS(facet_check(chsh_expression(), rat(3)), UserError);
    }
    SUBCASE("a non-facet supporting inequality is recognized") {
        // sum of two positivities: valid with local bound 0, but not a facet
        BellExpression e = BellExpression::zero(Scenario::homogeneous(2, 2, 2));
        e.coeff[0] = rat(-1);
        e.coeff[1] = rat(-1);
        CHECK_FALSE(facet_check(e, rat(0)));
    }
    SUBCASE("a composite of facets is a facet") {
        // -(c' - b' mu)(c'' - b'' mu) <= 0 built from CHSH and positivity
        BellExpression chsh = chsh_expression();
        SymmetricTensor t = to_symmetric(chsh);
        t.gamma[0] -= rat(2); // subtract the bound times the unit
        BellExpression left = from_symmetric(t);
        BellExpression pos(scen({{2}}), {rat(-1), rat(0)});
        BellExpression comp = negate(tensor(left, pos));
        CHECK(local_bound(comp) == 0);
        CHECK(facet_check(comp, rat(0)));
    }
}
