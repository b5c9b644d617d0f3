#include "pal/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace pal {

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &md_len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(md_len * 2, '0');
  for (unsigned int i = 0; i < md_len; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 0xf];
  }
  return out;
}

}  // namespace pal
