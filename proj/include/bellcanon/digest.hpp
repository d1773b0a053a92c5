#pragma once

#include <cstdint>
#include <string>

namespace bellcanon {

// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string &data);

} // namespace bellcanon
