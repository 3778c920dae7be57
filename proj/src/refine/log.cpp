#include <string>

#include "dfmforge/core/hash.hpp"
#include "dfmforge/refine/ops.hpp"

namespace dfmforge::refine {

using dfmforge::Error;
using dfmforge::ErrorCode;
using nlohmann::json;

ApplyResult apply_ops(const DfmSchema& schema, const std::vector<RefinementOp>& ops) {
  ApplyResult result{schema, {}, std::nullopt};
  auto hash = core::schema_hash(schema);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    try {
      auto next = apply_op(result.schema, ops[i]);
      auto next_hash = core::schema_hash(next);
      result.log.entries.push_back(LogEntry{ops[i], hash, next_hash});
      result.schema = std::move(next);
      hash = std::move(next_hash);
    } catch (const Error& e) {
      result.failure = OpFailure{i, e.code(), e.what()};
      break;
    }
  }
  return result;
}

DfmSchema replay(const DfmSchema& draft, const RefinementLog& log) {
  DfmSchema s = draft;
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    const auto& e = log.entries[i];
    if (core::schema_hash(s) != e.pre_hash)
      throw Error(ErrorCode::LogMismatch, "schema before step " + std::to_string(i) + " does not match the log");
    s = apply_op(s, e.op);
    if (core::schema_hash(s) != e.post_hash)
      throw Error(ErrorCode::LogMismatch, "step " + std::to_string(i) + " produced a different schema");
  }
  return s;
}

namespace {

std::string_view mode_name(DiscretizeMode m) { return m == DiscretizeMode::Replace ? "replace" : "insert"; }

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidOp, std::string("op is missing '") + key + "'");
  return j.at(key);
}

std::string text_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw Error(ErrorCode::InvalidOp, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> list_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array()) throw Error(ErrorCode::InvalidOp, std::string("'") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) throw Error(ErrorCode::InvalidOp, std::string("'") + key + "' must hold strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace

json to_json(const RefinementOp& op) {
  json j{{"kind", kind_name(op)}};
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Rename>) {
          j["old"] = o.old_name;
          j["new"] = o.new_name;
        } else if constexpr (std::is_same_v<T, SetAdditivity>) {
          j["measure"] = o.measure;
          j["level"] = std::string(core::to_string(o.level));
        } else if constexpr (std::is_same_v<T, Discretize>) {
          j["attr"] = o.attr;
          j["range"] = o.range_name;
          j["mode"] = std::string(mode_name(o.mode));
        } else if constexpr (std::is_same_v<T, CompleteTimeHierarchy>) {
          j["date"] = o.date_attr;
        } else if constexpr (std::is_same_v<T, MergeSharedHierarchy>) {
          j["attrs"] = o.attrs;
          j["merged"] = o.merged;
          j["roles"] = o.roles;
        } else {
          j["attr"] = o.attr;
        }
      },
      op);
  return j;
}

RefinementOp op_from_json(const json& j, DiscretizeMode default_mode) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidOp, "op must be an object");
  auto kind = text_field(j, "kind");
  if (kind == "rename") return Rename{text_field(j, "old"), text_field(j, "new")};
  if (kind == "set_additivity") {
    auto level = core::additivity_from_string(text_field(j, "level"));
    if (!level) throw Error(ErrorCode::InvalidOp, "unknown additivity level '" + text_field(j, "level") + "'");
    return SetAdditivity{text_field(j, "measure"), *level};
  }
  if (kind == "mark_descriptive") return MarkDescriptive{text_field(j, "attr")};
  if (kind == "discretize") {
    auto mode = default_mode;
    if (j.contains("mode")) {
      auto m = text_field(j, "mode");
      if (m == "replace") mode = DiscretizeMode::Replace;
      else if (m == "insert") mode = DiscretizeMode::Insert;
      else throw Error(ErrorCode::InvalidOp, "unknown discretize mode '" + m + "'");
    }
    return Discretize{text_field(j, "attr"), text_field(j, "range"), mode};
  }
  if (kind == "mark_optional") return MarkOptional{text_field(j, "attr")};
  if (kind == "complete_time_hierarchy") return CompleteTimeHierarchy{text_field(j, "date")};
  if (kind == "remove_attribute") return RemoveAttribute{text_field(j, "attr")};
  if (kind == "merge_shared_hierarchy")
    return MergeSharedHierarchy{list_field(j, "attrs"), text_field(j, "merged"), list_field(j, "roles")};
  throw Error(ErrorCode::InvalidOp, "unknown op kind '" + kind + "'");
}

std::vector<RefinementOp> ops_from_json(const json& j, DiscretizeMode default_mode) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidOp, "ops must be a list");
  std::vector<RefinementOp> out;
  for (const auto& x : j) out.push_back(op_from_json(x, default_mode));
  return out;
}

json to_json(const RefinementLog& log) {
  auto arr = json::array();
  for (const auto& e : log.entries) arr.push_back({{"op", to_json(e.op)}, {"pre", e.pre_hash}, {"post", e.post_hash}});
  return arr;
}

RefinementLog log_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidOp, "log must be a list");
  RefinementLog log;
  for (const auto& x : j)
    log.entries.push_back(LogEntry{op_from_json(field(x, "op")), text_field(x, "pre"), text_field(x, "post")});
  return log;
}

}  // namespace dfmforge::refine
