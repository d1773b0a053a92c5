#pragma once

#include <random>
#include <set>
#include <vector>

#include "bellcanon/canonical.hpp"
#include "bellcanon/expr.hpp"
#include "bellcanon/nsbasis.hpp"
#include "bellcanon/perm.hpp"
#include "bellcanon/scenario.hpp"
#include "bellcanon/symmgroup.hpp"

namespace bellcanon::testing {

inline Rat rat(long n, long d = 1) { return make_rat(n, d); }

inline Scenario scen(std::vector<Party> parties) { return Scenario(std::move(parties)); }

inline BellExpression expr_of(const Scenario &s, std::vector<long> ints) {
    std::vector<Rat> c;
    c.reserve(ints.size());
    for (long v : ints)
        c.push_back(rat(v));
    return BellExpression(s, std::move(c));
}

// CHSH as coefficients (-1)^(a+b+x(y+1)), all labels 1-based.
inline BellExpression chsh_expression() {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    BellExpression e = BellExpression::zero(s);
    for (int a = 1; a <= 2; ++a)
        for (int b = 1; b <= 2; ++b)
            for (int x = 1; x <= 2; ++x)
                for (int y = 1; y <= 2; ++y) {
                    IndexTuple t{{{a, x}, {b, y}}};
                    e.at(t) = ((a + b + x * (y + 1)) % 2 == 0) ? rat(1) : rat(-1);
                }
    return e;
}

// CH with upper bound zero:
//   -P(21|11) - P(12|21) - P(11|12) + P(11|22) <= 0
// written with c_{abxy} index order (outcome a, outcome b, setting x, setting y).
inline BellExpression ch_expression() {
    Scenario s = Scenario::homogeneous(2, 2, 2);
    BellExpression e = BellExpression::zero(s);
    e.at(IndexTuple{{{2, 1}, {1, 1}}}) = rat(-1);
    e.at(IndexTuple{{{1, 2}, {2, 1}}}) = rat(-1);
    e.at(IndexTuple{{{1, 1}, {1, 2}}}) = rat(-1);
    e.at(IndexTuple{{{1, 2}, {1, 2}}}) = rat(1);
    return e;
}

// All elements of the group generated by `gens`, by breadth-first closure.
inline std::set<Perm> enumerate_group(const std::vector<Perm> &gens, int degree) {
    std::set<Perm> elements{Perm::identity(degree)};
    std::vector<Perm> queue{Perm::identity(degree)};
    while (!queue.empty()) {
        Perm g = queue.back();
        queue.pop_back();
        for (const Perm &s : gens) {
            Perm h = mul(g, s);
            if (elements.insert(h).second)
                queue.push_back(h);
        }
    }
    return elements;
}

// Distinct images of e under the whole group, lexicographically sorted.
inline std::vector<BellExpression> enumerate_orbit(const BellExpression &e,
                                                   const std::vector<Perm> &gens) {
    std::set<std::vector<Rat>> seen;
    std::vector<BellExpression> queue{e};
    seen.insert(e.coeff);
    while (!queue.empty()) {
        BellExpression cur = queue.back();
        queue.pop_back();
        for (const Perm &g : gens) {
            BellExpression img = act(g, cur);
            if (seen.insert(img.coeff).second)
                queue.push_back(img);
        }
    }
    std::vector<BellExpression> orbit;
    for (const auto &c : seen)
        orbit.push_back(BellExpression(e.scenario, c));
    std::sort(orbit.begin(), orbit.end(),
              [](const BellExpression &a, const BellExpression &b) {
                  return lex_less(a, b);
              });
    return orbit;
}

inline BellExpression random_expression(const Scenario &s, std::mt19937_64 &rng,
                                        int lo = -6, int hi = 6) {
    std::uniform_int_distribution<int> dist(lo, hi);
    std::vector<Rat> c(s.full_dimension());
    for (auto &x : c)
        x = rat(dist(rng));
    return BellExpression(s, std::move(c));
}

inline BellExpression random_rational_expression(const Scenario &s,
                                                 std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> num(-8, 8);
    std::uniform_int_distribution<int> den(1, 4);
    std::vector<Rat> c(s.full_dimension());
    for (auto &x : c)
        x = rat(num(rng), den(rng));
    return BellExpression(s, std::move(c));
}

// A random exact local point: a rational convex mixture of deterministic
// strategies. Local points are no-signaling and affinely span the whole
// no-signaling subspace.
inline CorrelationPoint random_local_point(const Scenario &s, std::mt19937_64 &rng,
                                           int mixture = 4) {
    std::vector<Rat> p(s.full_dimension());
    std::uniform_int_distribution<int> wdist(1, 5);
    Rat total = 0;
    std::vector<std::pair<Rat, std::vector<std::vector<int>>>> parts;
    for (int t = 0; t < mixture; ++t) {
        std::vector<std::vector<int>> pick(s.party_count());
        for (int i = 0; i < s.party_count(); ++i) {
            pick[i].resize(s.setting_count(i));
            for (int j = 0; j < s.setting_count(i); ++j)
                pick[i][j] = (int)(rng() % s.outcome_count(i, j));
        }
        Rat w = rat(wdist(rng));
        total += w;
        parts.push_back({w, std::move(pick)});
    }
    for (auto &[w, pick] : parts) {
        CorrelationPoint det = deterministic_point(s, pick);
        for (size_t i = 0; i < p.size(); ++i)
            p[i] += (w / total) * det.p[i];
    }
    return CorrelationPoint(s, std::move(p));
}

} // namespace bellcanon::testing
