#pragma once

#include <map>
#include <string>
#include <vector>

#include "bellcanon/rational.hpp"
#include "bellcanon/scenario.hpp"

namespace bellcanon {

// Per-party (outcome, setting) pairs, 1-based like the rest of the public
// labels. 1 <= setting <= m_i and 1 <= outcome <= k_{i,setting}.
struct IndexTuple {
    struct PartyIndex {
        int outcome;
        int setting;
    };
    std::vector<PartyIndex> parts;
};

// Enumeration of coefficient indices: the fastest-varying index is party 1's
// outcome, then party 1's setting, then party 2's outcome, and so on through
// all parties in order. This is the column-major order a matrix view with
// party 1 as rows would have, and all lexicographic comparisons use it.
long long index_of(const IndexTuple &t, const Scenario &s); // 1-based
IndexTuple tuple_of(long long index, const Scenario &s);    // 1-based

// 0-based flat position of an (outcome, setting) pair inside one party's
// index space: settings are blocks, outcomes vary fastest within a block.
int party_flat_index(const Party &p, int outcome1, int setting1);

// A linear form over conditional probabilities, stored as a dense vector of
// exact rationals of length full_dimension(scenario) in the enumeration
// order above. Immutable value type; operations are pure.
struct BellExpression {
    Scenario scenario;
    std::vector<Rat> coeff;

    BellExpression() = default;
    BellExpression(Scenario s, std::vector<Rat> c);
    static BellExpression zero(const Scenario &s);

    const Rat &at(const IndexTuple &t) const;
    Rat &at(const IndexTuple &t);

    bool operator==(const BellExpression &) const = default;
};

// Lexicographic comparison of same-scenario expressions.
bool lex_less(const BellExpression &a, const BellExpression &b);

// A named upper bound of an oriented expression. `conditional` records
// whether the bound set is asserted to satisfy the heralding condition that
// makes bounds inheritable under composition.
struct BoundValue {
    Rat value;
    bool conditional = false;
    bool operator==(const BoundValue &) const = default;
};

// A Bell expression together with the "<=" orientation: all attached bounds
// are upper bounds. Lower bounds belong to the negated expression.
struct OrientedExpression {
    BellExpression expr;
    std::map<std::string, BoundValue> bounds;
};

// Conditional probabilities as a point in the same enumeration. All values
// lie in [0,1] and sum to one per joint setting (checked at construction).
struct CorrelationPoint {
    Scenario scenario;
    std::vector<Rat> p;

    CorrelationPoint(Scenario s, std::vector<Rat> values);
};

Rat evaluate(const BellExpression &e, const CorrelationPoint &point);

BellExpression negate(const BellExpression &e);
// Negates the coefficients and drops the bounds: upper bounds of the source
// are lower bounds of the result, which this type does not carry.
OrientedExpression negate(const OrientedExpression &e);

// Tensor product over disjoint party sets; the result scenario is the
// concatenation of the two scenarios.
BellExpression tensor(const BellExpression &a, const BellExpression &b);
CorrelationPoint tensor(const CorrelationPoint &a, const CorrelationPoint &b);

// Applies a party/setting reordering; the result lives in map.apply(scenario)
// with coefficients carried along.
BellExpression reorder(const BellExpression &e, const ReorderMap &map);

// The deterministic point where party i answers outcomes[i][setting]
// (0-based) with certainty.
CorrelationPoint deterministic_point(const Scenario &s,
                                     const std::vector<std::vector<int>> &outcomes);

} // namespace bellcanon
