#pragma once

#include <string>
#include <string_view>

namespace objgan::harness {

/// Lowercase hex BLAKE2b digest (32 bytes by default).
std::string blake2b_hex(std::string_view data, std::size_t bytes = 32);

}  // namespace objgan::harness
