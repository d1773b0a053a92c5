#pragma once

#include <stdexcept>
#include <string>

namespace bellcanon {

// Invalid input from a caller or a document: CLI exit code 1.
struct UserError : std::runtime_error {
    explicit UserError(const std::string &msg) : std::runtime_error(msg) {}
};

// A broken internal invariant (e.g. a stabilizer chain whose order does not
// match the combinatorial group order): CLI exit code 2.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string &msg) : std::logic_error(msg) {}
};

// Raised when a pipeline step receives an expression that is constant on the
// normalized no-signaling subspace, so no canonical form exists.
struct TrivialExpressionError : UserError {
    explicit TrivialExpressionError(const std::string &msg) : UserError(msg) {}
};

} // namespace bellcanon
