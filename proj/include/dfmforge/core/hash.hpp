#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::core {

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t value);

/// Hash of the canonical YAML serialization.
std::string schema_hash(const DfmSchema& schema);

}  // namespace dfmforge::core
