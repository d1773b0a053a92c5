#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bellcanon/errors.hpp"
#include "bellcanon/rational.hpp"

namespace bellcanon {

// One party: the number of outcomes of each measurement setting.
using Party = std::vector<int>;

// A Bell scenario: per-party, per-setting outcome counts. Every party has at
// least one setting and every setting at least two outcomes; a one-outcome
// setting is definitionally superfluous and is rejected at construction.
//
// Scenario equality is structural. `canonical_scenario` is the explicit
// normalizer that orders settings and parties.
//
// Immutable after construction; all operations on it are pure functions.
class Scenario {
  public:
    Scenario() = default;
    explicit Scenario(std::vector<Party> parties);
    static Scenario homogeneous(int n_parties, int n_settings, int n_outcomes);

    // Text forms: "(n,m,k)" for homogeneous scenarios,
    // "[(k11 k12 ...) (k21 ...) ...]" in general.
    static Scenario parse(const std::string &text);
    std::string to_text() const;

    int party_count() const { return (int)parties_.size(); }
    const Party &party(int i) const { return parties_[i]; }
    const std::vector<Party> &parties() const { return parties_; }
    int setting_count(int party) const { return (int)parties_[party].size(); }
    int outcome_count(int party, int setting) const { return parties_[party][setting]; }

    // Number of (outcome, setting) pairs of one party: sum_j k_ij.
    long long party_dim(int party) const;
    // Dimension D of the space of coefficient vectors: prod_i party_dim(i).
    long long full_dimension() const;
    // Dimension d of the normalized no-signaling subspace:
    // prod_i (1 + sum_j (k_ij - 1)) - 1.
    long long ns_dimension() const;

    bool is_canonical() const;
    // The scenario with party i removed (at least two parties required).
    Scenario without_party(int party) const;

    bool operator==(const Scenario &) const = default;

  private:
    std::vector<Party> parties_;
};

// A reordering of parties and settings that maps a scenario onto another one
// describing the same physical system. Distinct from a relabeling, which must
// leave the scenario unchanged.
struct ReorderMap {
    std::vector<int> party_to;                // new slot of each old party
    std::vector<std::vector<int>> setting_to; // per old party, new index of each old setting

    static ReorderMap identity(const Scenario &s);
    bool is_identity() const;
    Scenario apply(const Scenario &source) const;
    ReorderMap inverse() const;
    // this, then next.
    ReorderMap then(const ReorderMap &next) const;
};

// Sorts each party's settings by nonincreasing outcome count, then sorts
// parties lexicographically (larger first, comparing outcome-count sequences
// padded with zeros). Both sorts are stable, so ties keep their original
// relative order and the returned map is deterministic. Idempotent.
std::pair<Scenario, ReorderMap> canonical_scenario(const Scenario &s);

} // namespace bellcanon
