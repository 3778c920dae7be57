#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::llm {

struct Extracted {
  std::string yaml;  // the text that was parsed
  core::DfmSchema schema;
};

/// Finds the schema in a chat answer. Fenced code blocks are tried first,
/// in order; without a usable block, the longest run of lines starting at a
/// top-level schema tag that parses (leniently) with a fact wins. Trailing
/// lines are dropped one by one until the run parses.
std::optional<Extracted> find_schema(std::string_view response);

/// Same, throwing ExtractionFailure when nothing usable is found.
Extracted extract_schema(std::string_view response);

}  // namespace dfmforge::llm
