#pragma once

#include <gmpxx.h>

#include <span>
#include <string>
#include <vector>

#include "bellcanon/errors.hpp"

namespace bellcanon {

// Exact arithmetic everywhere: coefficients are arbitrary-precision rationals
// and group orders arbitrary-precision integers. Floating point is never used
// in the core, since lexicographic comparison and gcd normalization must be
// exact.
using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const Int &num, const Int &den) {
    if (den == 0)
        throw UserError("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Rat make_rat(long num, long den = 1) { return make_rat(Int(num), Int(den)); }

// Accepts "p" or "p/q" with optional sign; used by the document parser and CLI.
Rat parse_rat(const std::string &text);

std::string to_string(const Rat &r);
std::string to_string(const Int &n);

inline bool is_integer(const Rat &r) { return r.get_den() == 1; }

// The unique s > 0 such that s*values are integers with gcd 1.
// Throws TrivialExpressionError when all values are zero.
Rat integer_scale(std::span<const Rat> values);

Int factorial(int n);

} // namespace bellcanon
