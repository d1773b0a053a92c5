#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bellcanon/nsbasis.hpp"
#include "bellcanon/symmgroup.hpp"

namespace bellcanon {

// ---------------------------------------------------------------------------
// Bound sets

// Named bound sets the library knows about. `conditional` asserts that the
// set satisfies the heralding condition under which bounds compose; it is
// false for Svetlichny-style sets, whose bounds are not inheritable.
struct BoundSetInfo {
    std::string name;
    bool conditional;
    bool oracle; // computable by the deterministic-strategy oracle
};
const std::vector<BoundSetInfo> &known_bound_sets();
bool bound_set_conditional(const std::string &name); // false for unknown sets

// ---------------------------------------------------------------------------
// Superfluous structure

struct RemovedParty {
    int party; // position at removal time
    Party signature;
};
struct RemovedSetting {
    int party;
    int setting; // position at removal time
    int outcomes;
};
struct MergedOutcomes {
    int party;
    int setting;
    int kept;    // lowest label, kept (1-based)
    int removed; // higher label, deleted (1-based)
};
struct ReorderStep {
    ReorderMap map;
};
// Constant component shed by the re-projection after an outcome merge. Pure
// value bookkeeping for bound transforms; structurally the merge and its
// re-lift are exact on projected representatives without it.
struct ShiftStep {
    Rat value;
};
using StructureStep =
    std::variant<RemovedParty, RemovedSetting, MergedOutcomes, ReorderStep, ShiftStep>;

struct StructureReport {
    std::vector<StructureStep> steps; // in application order
    bool constant = false;            // the expression had no structure at all
    bool empty() const { return steps.empty() && !constant; }
};

// Removes superfluous parties, settings and outcome distinctions until none
// remain, keeping the scenario canonical along the way. The input must be
// projected; detection runs on the symmetric tensor (a setting is superfluous
// iff all its lambda components vanish) and on projected probability slices
// for outcome pairs. A constant expression is returned unchanged with
// `constant` set.
std::pair<BellExpression, StructureReport> remove_superfluous(const BellExpression &e);

// Replays the removals of `report` backwards, lifting `e` back into the
// scenario the report started from. Exact inverse of remove_superfluous.
BellExpression relift(const BellExpression &e, const StructureReport &report);

// ---------------------------------------------------------------------------
// Composite splitting

struct SplitResult {
    // Constant that must be added to the expression for it to become a tensor
    // product across the partition (the bound-composition formula uses the
    // opposite sign: expression = factor_a (x) factor_b - kappa * unit).
    Rat kappa;
    BellExpression factor_a; // integer coefficients, gcd 1, sign normalized
    BellExpression factor_b;
    std::vector<int> parties_a; // original party positions, ascending
    std::vector<int> parties_b;
};

// Looks for a bipartition of the parties across which the expression, after
// adding a unique constant, becomes a tensor product. The test runs on the
// projected symmetric tensor, flattened across the bipartition: the split
// exists iff the flattened matrix minus kappa at the corner has rank one.
// Partitions are tried smallest second block first, with party 0 anchored in
// the first block. Empty when the expression is not composite.
std::optional<SplitResult> split_composite(const BellExpression &e);

// ---------------------------------------------------------------------------
// Decomposition trees

struct DecompositionTree;

// A non-composite canonical constituent and the exact transform that links
// it to the factor it came from:
//   factor = sign * ( shift * unit + (1/scale) * undo(steps, witness, canonical) )
// where undo replays the recorded reorders and removals backwards and the
// witness satisfies act(witness, normalized factor) == canonical.expr.
struct Leaf {
    OrientedExpression canonical;
    int sign = 1;
    Rat scale; // positive; canonical = scale * lifted factor after sign fix
    Rat shift; // the factor's constant component, removed at projection
    StructureReport structure;
    Perm witness;
    Int orbit_rank;
};

struct Product {
    Rat kappa; // split constant, "added" convention as in SplitResult
    std::vector<DecompositionTree> children; // two, sorted by canonical key
    std::vector<std::vector<int>> child_parties; // positions per child in the
                                                 // reduced scenario below
    // transform from this node's input down to the reduced scenario the
    // split ran in, same meaning as the Leaf fields
    Rat shift;
    StructureReport structure;
    int sign = 1;
};

struct DecompositionTree {
    std::variant<Leaf, Product> node;

    bool is_leaf() const { return std::holds_alternative<Leaf>(node); }
    const Leaf &leaf() const { return std::get<Leaf>(node); }
    const Product &product() const { return std::get<Product>(node); }
    std::vector<const Leaf *> leaves() const;
};

struct DecomposeOptions {
    bool compute_ranks = true;
    LexMinOptions lexmin = {};
};

// The full canonicalization pipeline: project, reorder the scenario, rescale
// to coprime integers, strip superfluous structure, split composites
// recursively, and lex-minimize every leaf. Throws TrivialExpressionError
// when the expression is constant on the no-signaling subspace.
DecompositionTree decompose(const OrientedExpression &e,
                            const DecomposeOptions &opts = {});

// Rebuilds the expression a tree was computed from, exactly, in its
// no-signaling-projected form (with the constant component restored; the
// pure signaling components discarded by the projection are the degeneracy
// the canonical form exists to remove).
BellExpression recompose(const DecompositionTree &tree);

// The projected representative recompose reproduces: signaling components
// dropped, constant kept.
BellExpression ns_representative(const BellExpression &e);

// ---------------------------------------------------------------------------
// Bound composition and oracles

struct TwoSidedBound {
    std::optional<Rat> lower;
    std::optional<Rat> upper;
    bool conditional = false;
};

struct ComposedBound {
    Rat lower, upper;
};

// Bounds of kappa + a (x) b from two-sided factor bounds: the extrema of the
// four products, shifted by kappa. Tight when the inputs are. Throws if a
// side is missing or a factor's bound set is not conditional.
ComposedBound compose_bounds(const TwoSidedBound &a, const TwoSidedBound &b,
                             const Rat &kappa);

inline constexpr long long kDefaultStrategyCap = 1LL << 22;

// Maximum over all deterministic strategies (one outcome per party per
// setting); the vertices of the local polytope. Serial and OpenMP variants
// produce identical results; the parallel one is the default entry point.
Rat local_bound(const BellExpression &e, long long strategy_cap = kDefaultStrategyCap);
Rat local_bound_serial(const BellExpression &e,
                       long long strategy_cap = kDefaultStrategyCap);

// True iff the deterministic points saturating `bound` span an affine
// subspace of dimension ns_dimension - 1. `bound` must equal the local
// bound, otherwise the facet question is ill-posed and this throws.
bool facet_check(const BellExpression &e, const Rat &bound,
                 long long strategy_cap = kDefaultStrategyCap);

} // namespace bellcanon
