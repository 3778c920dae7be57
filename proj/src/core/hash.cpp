#include "dfmforge/core/hash.hpp"

#include <cstdio>

#include "dfmforge/core/codec.hpp"

namespace dfmforge::core {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string schema_hash(const DfmSchema& schema) { return to_hex(fnv1a64(serialize_yaml(schema))); }

}  // namespace dfmforge::core
