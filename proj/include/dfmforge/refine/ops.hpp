#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dfmforge/core/error.hpp"
#include "dfmforge/core/schema.hpp"

namespace dfmforge::refine {

using core::DfmSchema;

enum class DiscretizeMode {
  Replace,  // the range attribute takes the dense attribute's place
  Insert,   // the range attribute becomes a new parent level (attr -> range)
};

struct Rename {
  std::string old_name;
  std::string new_name;
  friend bool operator==(const Rename&, const Rename&) = default;
};
struct SetAdditivity {
  std::string measure;
  core::Additivity level = core::Additivity::Additive;
  friend bool operator==(const SetAdditivity&, const SetAdditivity&) = default;
};
struct MarkDescriptive {
  std::string attr;
  friend bool operator==(const MarkDescriptive&, const MarkDescriptive&) = default;
};
struct Discretize {
  std::string attr;
  std::string range_name;
  DiscretizeMode mode = DiscretizeMode::Replace;
  friend bool operator==(const Discretize&, const Discretize&) = default;
};
struct MarkOptional {
  std::string attr;
  friend bool operator==(const MarkOptional&, const MarkOptional&) = default;
};
struct CompleteTimeHierarchy {
  std::string date_attr;
  friend bool operator==(const CompleteTimeHierarchy&, const CompleteTimeHierarchy&) = default;
};
struct RemoveAttribute {
  std::string attr;
  friend bool operator==(const RemoveAttribute&, const RemoveAttribute&) = default;
};
struct MergeSharedHierarchy {
  std::vector<std::string> attrs;
  std::string merged;
  std::vector<std::string> roles;
  friend bool operator==(const MergeSharedHierarchy&, const MergeSharedHierarchy&) = default;
};

using RefinementOp = std::variant<Rename, SetAdditivity, MarkDescriptive, Discretize, MarkOptional,
                                  CompleteTimeHierarchy, RemoveAttribute, MergeSharedHierarchy>;

/// "rename", "set_additivity", ... (the `kind` field of the JSON encoding).
std::string kind_name(const RefinementOp& op);

// Individual rewrites. Each returns a new schema and throws dfmforge::Error
// when its precondition fails; the input is never modified.

DfmSchema rename(const DfmSchema& schema, const std::string& old_name, const std::string& new_name);
DfmSchema set_additivity(const DfmSchema& schema, const std::string& measure, core::Additivity level);
DfmSchema mark_descriptive(const DfmSchema& schema, const std::string& attr);
DfmSchema discretize(const DfmSchema& schema, const std::string& attr, const std::string& range_name,
                     DiscretizeMode mode = DiscretizeMode::Replace);
DfmSchema mark_optional(const DfmSchema& schema, const std::string& attr);
DfmSchema complete_time_hierarchy(const DfmSchema& schema, const std::string& date_attr);
DfmSchema merge_shared_hierarchy(const DfmSchema& schema, const std::vector<std::string>& attrs,
                                 const std::string& merged, const std::vector<std::string>& roles);
DfmSchema remove_attribute(const DfmSchema& schema, const std::string& attr);

DfmSchema apply_op(const DfmSchema& schema, const RefinementOp& op);

struct LogEntry {
  RefinementOp op;
  std::string pre_hash;
  std::string post_hash;
  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct RefinementLog {
  std::vector<LogEntry> entries;
  friend bool operator==(const RefinementLog&, const RefinementLog&) = default;
};

struct OpFailure {
  std::size_t index = 0;  // position of the failing op in the input list
  dfmforge::ErrorCode code = dfmforge::ErrorCode::InvalidOp;
  std::string message;
};

struct ApplyResult {
  DfmSchema schema;  // after the last successful op
  RefinementLog log;
  std::optional<OpFailure> failure;
};

ApplyResult apply_ops(const DfmSchema& schema, const std::vector<RefinementOp>& ops);

/// Re-applies a log to `draft`, checking every recorded hash on the way.
/// Throws LogMismatch when the draft or any intermediate step diverges.
DfmSchema replay(const DfmSchema& draft, const RefinementLog& log);

// JSON encoding: {"kind": "rename", "old": ..., "new": ...} and so on; see
// the README for the field list. `default_mode` fills a discretize op that
// has no "mode" field.
nlohmann::json to_json(const RefinementOp& op);
RefinementOp op_from_json(const nlohmann::json& json, DiscretizeMode default_mode = DiscretizeMode::Replace);
std::vector<RefinementOp> ops_from_json(const nlohmann::json& json,
                                        DiscretizeMode default_mode = DiscretizeMode::Replace);
nlohmann::json to_json(const RefinementLog& log);
RefinementLog log_from_json(const nlohmann::json& json);

}  // namespace dfmforge::refine
