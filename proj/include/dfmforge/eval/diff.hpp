#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::eval {

/// One bucket per refinement step plus Structure for graph breakage.
enum class Category { Renaming, Additivity, DescriptiveOrDiscretized, Optional, TimeHierarchy, Removal, Structure };

inline constexpr std::array<Category, 7> kCategories = {
    Category::Renaming, Category::Additivity,    Category::DescriptiveOrDiscretized, Category::Optional,
    Category::TimeHierarchy, Category::Removal, Category::Structure};

std::string_view to_string(Category category);
std::optional<Category> category_from_string(std::string_view text);

enum class Normalization { Exact, CaseInsensitiveAlnum };

std::string_view to_string(Normalization mode);

struct MatchConfig {
  Normalization name_normalization = Normalization::CaseInsensitiveAlnum;
  std::array<int, 7> weights = {1, 1, 1, 1, 1, 1, 1};  // indexed like kCategories, each >= 0

  int weight(Category c) const { return weights[static_cast<std::size_t>(c)]; }
};

/// Feasible refinements of one draft; a candidate is scored against the
/// closest one.
struct GroundTruthSet {
  std::vector<core::DfmSchema> alternatives;
};

/// Throws EmptyGroundTruth, or Precondition naming the first invalid alternative.
void check_ground_truth(const GroundTruthSet& truth);

struct Discrepancy {
  Category category;
  std::string expected;  // truth side, empty when the truth has nothing there
  std::string found;     // candidate side

  friend bool operator==(const Discrepancy&, const Discrepancy&) = default;
};

struct DiffReport {
  std::map<Category, int> errors_by_category;  // all seven keys present
  int total = 0;                               // weighted sum of the counts
  double node_precision = 1.0;
  double node_recall = 1.0;
  double arc_precision = 1.0;
  double arc_recall = 1.0;
  std::vector<Discrepancy> detail;
  std::size_t alternative = 0;  // index of the truth alternative used

  int count(Category c) const;
  friend bool operator==(const DiffReport&, const DiffReport&) = default;
};

/// Candidate node name -> truth node name. Measures appear under their
/// rendered names.
using NodeMapping = std::map<std::string, std::string>;

std::string normalize_name(std::string_view name, Normalization mode);

/// Greedy matching. The facts are always paired and kinds never mix. Pass one
/// pairs equal normalized names (lexicographic tie-break), pass two pairs
/// names where one contains the other and the pairing is unique both ways.
/// Candidate attributes that shadow a measure (fake nodes) stay unmatched.
NodeMapping match_nodes(const core::DfmSchema& candidate, const core::DfmSchema& truth, const MatchConfig& cfg = {});

/// Cheapest mapping by branch-and-bound over every partial injective
/// mapping. Throws MatcherLimit when either schema has more than
/// `max_nodes` nodes.
NodeMapping match_nodes_exhaustive(const core::DfmSchema& candidate, const core::DfmSchema& truth,
                                   const MatchConfig& cfg = {}, std::size_t max_nodes = 12);

/// Scores a candidate against one truth schema under a given mapping.
DiffReport score(const core::DfmSchema& candidate, const core::DfmSchema& truth, const NodeMapping& mapping,
                 const MatchConfig& cfg = {});

/// Minimum-total report over the alternatives (first one wins ties).
/// Throws EmptyGroundTruth.
DiffReport diff(const core::DfmSchema& candidate, const GroundTruthSet& truth, const MatchConfig& cfg = {});

/// Same, with match_nodes_exhaustive.
DiffReport diff_exhaustive(const core::DfmSchema& candidate, const GroundTruthSet& truth, const MatchConfig& cfg = {});

enum class ReportFormat { Text, Json, Csv };

/// text: "total: N" line, one "<Category>: n" line per category, ratios,
///       then one "- <Category>: expected '..', found '..'" line per record.
/// json: see to_json(DiffReport).
/// csv:  header "category,count" and one row per category; rows sum to total
///       when all weights are 1.
std::string report_render(const DiffReport& report, ReportFormat format);

/// {"total", "errors_by_category": {name: n}, "node_precision", "node_recall",
///  "arc_precision", "arc_recall", "alternative",
///  "detail": [{"category", "expected", "found"}],
///  "metadata": {"shared_arcs": "per_arc"}}
nlohmann::json to_json(const DiffReport& report);
DiffReport report_from_json(const nlohmann::json& json);

}  // namespace dfmforge::eval
