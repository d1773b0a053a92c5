#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "bellcanon/perm.hpp"

namespace bellcanon {

// Generators of the relabeling group of a canonical-form scenario, plus its
// order computed combinatorially: one factor r! per maximal run of identical
// parties, q! per maximal run of equal-outcome-count settings inside a party,
// and k! per setting for the outcomes. The generators are the adjacent
// transpositions of each kind.
struct GeneratorSet {
    std::vector<Perm> gens;
    Int order;
};

GeneratorSet relabeling_group(const Scenario &s); // throws on non-canonical scenarios

// One level of a stabilizer chain: the subgroup fixing every point below
// `base` pointwise, its strong generators whose smallest moved point is
// `base`, and a transversal with pairwise-distinct images of `base`.
struct ChainLevel {
    int base = 0;
    std::vector<Perm> gens;
    std::vector<int32_t> orbit;      // images of base, ascending
    std::vector<Perm> transversal;   // transversal[t] maps base to orbit[t]
    std::vector<int32_t> slot;       // point -> index into orbit, or -1

    int transversal_index(int point) const { return slot[point]; }
};

// A stabilizer chain with the prescribed base 1, 2, ..., D-1 (0-based here),
// points already stabilized by the remaining subgroup skipped. Immutable
// after construction.
struct StabilizerChain {
    int degree = 0;
    std::vector<ChainLevel> levels; // bases strictly increasing

    Int order() const;
    // Order of the subgroup at levels[from] and below.
    Int suborder(int from_level) const;
    // First level whose base is >= position, i.e. the level of the subgroup
    // stabilizing all positions < position.
    int level_at(int position) const;
    // Strips g through levels [from_level, end); the result is the identity
    // iff g belongs to that subgroup (given g fixes the points below).
    Perm sift(const Perm &g, int from_level = 0) const;
    bool contains(const Perm &g) const;
};

struct ChainOptions {
    bool randomized = false; // random-product fast path; the final order check
                             // against the known order always runs
};

// Deterministic Schreier-Sims with known-order early termination; throws
// InternalError if the finished chain's order disagrees with known_order.
StabilizerChain build_chain(const std::vector<Perm> &gens, const Int &known_order,
                            int degree, const ChainOptions &opts = {});
// Variant for subgroups whose order is not known in advance.
StabilizerChain build_chain_unverified(const std::vector<Perm> &gens, int degree);

// Chain of the subgroup of `chain` (from `from_level` on) preserving the
// coloring pointwise: color[i^g] == color[i] for all i. Backtrack search over
// the chain with color pruning.
StabilizerChain coloring_stabilizer(const StabilizerChain &chain, int from_level,
                                    std::span<const int> color);

// Minimal vector v' = v . g over g in the subgroup at from_level, i.e.
// v'[i] = v[g[i]] lexicographically smallest; `witness` is that g, chosen
// deterministically (first by transversal order at each level).
struct ChainMinResult {
    std::vector<Rat> vec;
    Perm witness;
};
ChainMinResult lexmin_under(const StabilizerChain &chain, int from_level,
                            const std::vector<Rat> &v);

// The relabeling group of one scenario with everything lex_min, orbit_size
// and rank/unrank need: generators, combinatorial order, the full stabilizer
// chain on coefficient positions (built lazily), and per-first-party row and
// column groups for the matrix algorithm. Immutable after construction; the
// lazy caches are internally synchronized, so concurrent use is safe.
class ScenarioGroup {
  public:
    explicit ScenarioGroup(Scenario s, const ChainOptions &opts = {});

    const Scenario &scenario() const { return scenario_; }
    const GeneratorSet &generators() const { return gens_; }
    const Int &order() const { return gens_.order; }
    const StabilizerChain &full_chain() const;

    // Parties that a relabeling can move to the first slot: the maximal run
    // of parties identical to party 0.
    const std::vector<int> &admissible_first_parties() const { return first_parties_; }

    struct MatrixContext {
        int first_party = 0;
        long long rows = 0, cols = 0;
        std::vector<int32_t> row_of, col_of; // global index -> row / column
        std::vector<int64_t> global_of;      // row + rows*col -> global index
        Scenario row_scenario, col_scenario;
        GeneratorSet row_group;
        StabilizerChain row_chain;
        GeneratorSet col_group;
        StabilizerChain col_chain;
    };
    const MatrixContext &matrix_context(int first_party) const;

  private:
    Scenario scenario_;
    GeneratorSet gens_;
    ChainOptions opts_;
    std::vector<int> first_parties_;
    mutable std::once_flag chain_once_;
    mutable std::unique_ptr<StabilizerChain> chain_;
    mutable std::vector<std::once_flag> ctx_once_;
    mutable std::vector<std::unique_ptr<MatrixContext>> ctx_;
};

enum class LexMinAlgorithm {
    Matrix,      // column-by-column matrix search, the default
    PointFilter, // coefficient-by-coefficient filter, kept as the reference
};

struct LexMinOptions {
    LexMinAlgorithm algorithm = LexMinAlgorithm::Matrix;
    bool parallel = true; // evaluate independent candidates with OpenMP
};

// The lexicographically smallest relabeling image of e, with a witness such
// that act(witness, e) == minimal. Running lex_min on its own output returns
// it unchanged with the identity witness.
struct LexMinResult {
    BellExpression minimal;
    Perm witness;
};
LexMinResult lex_min(const BellExpression &e, const ScenarioGroup &g,
                     const LexMinOptions &opts = {});

// Number of distinct relabeling images: |G| / |stabilizer of e|.
Int orbit_size(const BellExpression &e, const ScenarioGroup &g);

// 1-based position of e in its lexicographically sorted orbit, computed from
// block sizes without enumerating the orbit, and its inverse.
Int rank_of(const BellExpression &e, const ScenarioGroup &g);
BellExpression unrank(const BellExpression &min_rep, const Int &rank,
                      const ScenarioGroup &g);

// Generators, inside the relabeling group of the single party `p`, of the
// subgroup preserving a row coloring pointwise, with that subgroup's order.
GeneratorSet party_coloring_stabilizer(const Party &p, const std::vector<int> &color);

} // namespace bellcanon
