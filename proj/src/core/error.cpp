#include "dfmforge/core/error.hpp"

namespace dfmforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::YamlSyntax: return "YamlSyntax";
    case ErrorCode::MissingTag: return "MissingTag";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::NonScalarName: return "NonScalarName";
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownMeasure: return "UnknownMeasure";
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::DescriptiveWithChildren: return "DescriptiveWithChildren";
    case ErrorCode::NonIsomorphicSubhierarchies: return "NonIsomorphicSubhierarchies";
    case ErrorCode::RoleCountMismatch: return "RoleCountMismatch";
    case ErrorCode::CannotRemoveFact: return "CannotRemoveFact";
    case ErrorCode::CannotRemoveMeasure: return "CannotRemoveMeasure";
    case ErrorCode::InvalidOp: return "InvalidOp";
    case ErrorCode::LogMismatch: return "LogMismatch";
    case ErrorCode::RelationalSyntax: return "RelationalSyntax";
    case ErrorCode::EmptySchema: return "EmptySchema";
    case ErrorCode::InvalidTable: return "InvalidTable";
    case ErrorCode::BrokenForeignKey: return "BrokenForeignKey";
    case ErrorCode::UnknownFactTable: return "UnknownFactTable";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::CyclicForeignKeys: return "CyclicForeignKeys";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::MatcherLimit: return "MatcherLimit";
    case ErrorCode::ClientError: return "ClientError";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::ExtractionFailure: return "ExtractionFailure";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dfmforge
