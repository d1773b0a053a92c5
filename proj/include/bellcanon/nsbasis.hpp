#pragma once

#include <utility>
#include <vector>

#include "bellcanon/expr.hpp"

namespace bellcanon {

// The relabeling-compatible basis of one party's (outcome, setting) space.
// Order: mu first, then the lambda block grouped by setting with zeta
// ascending inside, then the nu block by setting ascending. The count is
// 1 + sum_j (k_ij - 1) + (m_i - 1) = sum_j k_ij, so the basis is square.
//
//   mu_{ax}        = 1/m                          (normalization)
//   lambda^{zx}_{ax} = delta_{x,xi} (delta_{a,z} - delta_{a,z+1})
//   nu^{xi}_{ax}   = delta_{x,xi} - delta_{x,xi+1} (signaling directions)
struct PartyBasis {
    Party party;
    int dim = 0;
    std::vector<std::vector<Rat>> vectors; // vectors[b][point]
    std::vector<std::vector<Rat>> duals;   // <vectors[i], duals[j]> = delta_ij

    static constexpr int mu_index = 0;
    int lambda_begin() const { return 1; }
    int lambda_count() const { return dim - (int)party.size(); }
    int nu_begin() const { return 1 + lambda_count(); }
    int nu_count() const { return (int)party.size() - 1; }
    // basis index of lambda^{zeta,xi}, both 1-based
    int lambda_index(int setting1, int zeta1) const;
    bool is_nu(int basis_index) const { return basis_index >= nu_begin(); }
};

PartyBasis party_basis(const Party &p);

// Components gamma of an expression in the product of the per-party bases.
// Stored densely with the same strides as the coefficient vector (each
// party's axis length equals its coefficient-space dimension).
struct SymmetricTensor {
    Scenario scenario;
    std::vector<Rat> gamma;

    bool operator==(const SymmetricTensor &) const = default;
};

SymmetricTensor to_symmetric(const BellExpression &e);
BellExpression from_symmetric(const SymmetricTensor &t);

// Zeroes every component whose multi-index touches a nu basis element and
// moves the all-mu component (the constant) to the bound: the returned bound
// is `bound - gamma_{1...1}`. Idempotent, and compatible with relabelings.
std::pair<SymmetricTensor, Rat> project(const SymmetricTensor &t, const Rat &bound);

bool is_projected(const SymmetricTensor &t);

struct IntegerNormalized {
    BellExpression expr;
    Rat bound;
    Rat scale; // expr = scale * input, bound = scale * input bound, scale > 0
};

// Rescales so the coefficients are integers with gcd 1. Throws
// TrivialExpressionError on the zero expression, which has no canonical
// scale and signals a tautological inequality upstream.
IntegerNormalized normalize_integer(const BellExpression &e, const Rat &bound);

// Convenience for tensors (used by fixtures and reports).
std::pair<SymmetricTensor, Rat> scale_tensor(const SymmetricTensor &t, const Rat &s);

} // namespace bellcanon
