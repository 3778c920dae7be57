#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dfmforge {

/// Every failure the library reports carries one of these codes. The names
/// are stable: they appear verbatim in CLI diagnostics and HTTP error bodies.
enum class ErrorCode {
  // YAML / JSON schema codec
  YamlSyntax,
  MissingTag,
  UnknownTag,
  NonScalarName,
  EmptyName,
  // refinement operations
  UnknownNode,
  UnknownMeasure,
  NameCollision,
  InvalidName,
  DescriptiveWithChildren,
  NonIsomorphicSubhierarchies,
  RoleCountMismatch,
  CannotRemoveFact,
  CannotRemoveMeasure,
  InvalidOp,
  LogMismatch,
  // draft derivation
  RelationalSyntax,
  EmptySchema,
  InvalidTable,
  BrokenForeignKey,
  UnknownFactTable,
  UnknownColumn,
  CyclicForeignKeys,
  // evaluation
  EmptyGroundTruth,
  MatcherLimit,
  // LLM harness
  ClientError,
  ReplayMiss,
  ExtractionFailure,
  Precondition,
  // plumbing
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {})
      : std::runtime_error(message), code_(code), subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }
  /// The node, tag, table or file the error is about; may be empty.
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace dfmforge
