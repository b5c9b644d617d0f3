#pragma once

#include <string>

namespace pal {

/// Lowercase hex SHA-256 of the given bytes. Stable across runs and platforms.
std::string sha256_hex(const std::string& data);

}  // namespace pal
