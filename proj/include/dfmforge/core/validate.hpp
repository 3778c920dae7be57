#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::core {

enum class ViolationCode {
  Disconnected,
  Cycle,
  FactHasParent,
  DanglingMark,
  FakeNode,
  DescriptiveWithChildren,
  DuplicateArc,
  RoleOutsideSharedHierarchy,
  MisplacedMeasure,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string subject;  // node name, or "from -> to" for arc-level findings
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationCode code) const;
};

struct ValidateOptions {
  /// Intermediate (mid-edit) schemata may carry roles on arcs into nodes
  /// that are not shared yet; final schemata may not.
  bool allow_roles_outside_shared = false;
};

ValidationReport validate(const DfmSchema& schema, const ValidateOptions& options = {});

nlohmann::json to_json(const ValidationReport& report);
std::string to_text(const ValidationReport& report);

}  // namespace dfmforge::core
