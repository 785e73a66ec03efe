#include "objgan/harness/digest.hpp"

#include <sodium.h>

#include <stdexcept>
#include <vector>

namespace objgan::harness {

std::string blake2b_hex(std::string_view data, std::size_t bytes) {
  if (bytes < crypto_generichash_BYTES_MIN || bytes > crypto_generichash_BYTES_MAX) {
    throw std::invalid_argument("blake2b: unsupported digest length");
  }
  if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
  std::vector<unsigned char> out(bytes);
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char*>(data.data()), data.size(), nullptr,
                     0);
  std::string hex(2 * bytes + 1, '\0');
  sodium_bin2hex(hex.data(), hex.size(), out.data(), out.size());
  hex.pop_back();
  return hex;
}

}  // namespace objgan::harness
