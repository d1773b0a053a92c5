#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bellcanon/expr.hpp"

namespace bellcanon {

// A permutation of coefficient positions, 0-based internally. The group acts
// on the right: apply(mul(g, h), i) == apply(h, apply(g, i)).
struct Perm {
    std::vector<int32_t> img;

    Perm() = default;
    explicit Perm(std::vector<int32_t> images) : img(std::move(images)) {}
    static Perm identity(int n);

    int size() const { return (int)img.size(); }
    int operator[](int i) const { return img[i]; }
    bool is_identity() const;
    Perm inverse() const;

    bool operator==(const Perm &) const = default;
    bool operator<(const Perm &o) const { return img < o.img; }
};

Perm mul(const Perm &g, const Perm &h); // g then h

// Cycle notation on 1-based points, e.g. "(1 3)(2 4)"; "()" for the identity.
std::string cycle_string(const Perm &g);

// Moves coefficients: act(g, e)[i^g] = e[i]. The action is faithful and
// composes as act(h, act(g, e)) == act(mul(g, h), e).
BellExpression act(const Perm &g, const BellExpression &e);

// A relabeling in structured form: permutations of parties, of settings
// within parties, and of outcomes within settings, all compatible with the
// scenario (parties map onto identical parties, settings onto settings with
// the same outcome count).
struct Relabeling {
    std::vector<int> party_to;                          // new slot of old party
    std::vector<std::vector<int>> setting_to;           // [party][old setting]
    std::vector<std::vector<std::vector<int>>> outcome_to; // [party][setting][old outcome]

    static Relabeling identity(const Scenario &s);
    // Validates compatibility and converts to a point permutation.
    Perm to_perm(const Scenario &s) const;
};

} // namespace bellcanon
