#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::core {

struct ParseOptions {
  /// Reject tags outside the dialect instead of ignoring them.
  bool strict = false;
};

/// Reads one schema from the YAML dialect (tags fact/name, measures,
/// dependencies with from/to/role, descriptive, optional).
///
/// Parsing is lenient about structure: whatever the document says is loaded
/// as-is so that broken LLM output can still be scored. Only syntax and
/// missing mandatory tags fail. Throws dfmforge::Error.
DfmSchema parse_yaml(std::string_view text, const ParseOptions& options = {});

/// Canonical YAML: tags in dialect order, dependencies sorted by
/// (from, to, role), empty descriptive/optional tags omitted.
std::string serialize_yaml(const DfmSchema& schema);

/// JSON mirror of the YAML layout; used by the HTTP API and reports.
nlohmann::json to_json(const DfmSchema& schema);
DfmSchema from_json(const nlohmann::json& json, const ParseOptions& options = {});

/// Generic JSON-or-YAML document reader (op scripts, relational sources).
/// Plain YAML scalars true/false become booleans, every other scalar a string.
nlohmann::json parse_document(std::string_view text);

/// Quotes a scalar only when the plain form would not read back verbatim.
std::string yaml_scalar(std::string_view text);

}  // namespace dfmforge::core
