#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dfmforge::core {

enum class Additivity { Additive, SemiAdditive, NonAdditive };

/// "", " (SUM-AVG)" or " (AVG)".
std::string_view additivity_suffix(Additivity level);
/// "additive", "semi_additive", "non_additive" (the JSON/op-script spelling).
std::string_view to_string(Additivity level);
std::optional<Additivity> additivity_from_string(std::string_view text);

struct Measure {
  std::string name;  // base name, never carries a suffix
  Additivity additivity = Additivity::Additive;

  /// Name with its additivity suffix; this is how dependencies refer to it.
  std::string rendered() const;

  friend bool operator==(const Measure&, const Measure&) = default;
};

/// Splits "ExchangeRate (AVG)" into {"ExchangeRate", NonAdditive}. Names
/// without a recognised suffix are additive and returned unchanged.
Measure split_measure_name(std::string_view rendered);

struct Dependency {
  std::string from;
  std::string to;
  std::optional<std::string> role;

  friend auto operator<=>(const Dependency&, const Dependency&) = default;
};

enum class NodeKind { Fact, Measure, Attribute };

/// A DFM schema as loaded from (or written to) the YAML dialect.
///
/// Dependency endpoints are plain node names. A measure is referenced by its
/// rendered name, so `Amount (AVG)` in a dependency denotes the non-additive
/// measure `Amount`; a bare `Amount` there would be a different (fake) node.
/// Nothing here enforces the structural invariants; see validate().
struct DfmSchema {
  std::string fact;
  std::vector<Measure> measures;
  std::vector<Dependency> dependencies;
  std::vector<std::string> descriptive;
  std::vector<std::string> optional;

  friend bool operator==(const DfmSchema&, const DfmSchema&) = default;

  /// Measure whose base or rendered name equals `name`.
  const Measure* find_measure(std::string_view name) const;
  bool is_measure_node(std::string_view name) const;  // rendered names only
  bool is_attribute(std::string_view name) const;
  bool has_node(std::string_view name) const;
  std::optional<NodeKind> kind_of(std::string_view name) const;

  bool is_descriptive(std::string_view name) const;
  bool is_optional(std::string_view name) const;

  /// Dependency endpoints minus the fact and the measures, in order of
  /// first appearance.
  std::vector<std::string> attributes() const;
  /// Fact, measure (rendered) names, then attributes.
  std::vector<std::string> nodes() const;
  /// Attributes with an arc straight from the fact.
  std::vector<std::string> dimensions() const;
};

/// Same node set, arc multiset, marks and additivity; ignores list order.
bool structurally_equal(const DfmSchema& a, const DfmSchema& b);

/// Adjacency snapshot of a schema, indexed by node name.
class SchemaGraph {
 public:
  explicit SchemaGraph(const DfmSchema& schema);

  const std::vector<std::string>& nodes() const { return nodes_; }
  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }

  /// Indices into DfmSchema::dependencies.
  const std::vector<std::size_t>& out_arcs(const std::string& node) const;
  const std::vector<std::size_t>& in_arcs(const std::string& node) const;
  std::size_t in_degree(const std::string& node) const { return in_arcs(node).size(); }
  std::size_t out_degree(const std::string& node) const { return out_arcs(node).size(); }

  /// Distinct successor / predecessor names in arc order.
  std::vector<std::string> children(const std::string& node) const;
  std::vector<std::string> parents(const std::string& node) const;

  /// Nodes reachable from `root` (root included), breadth-first.
  std::set<std::string> reachable_from(const std::string& root) const;
  /// Strict descendants of `root`.
  std::set<std::string> descendants(const std::string& root) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> arcs_;  // (from, to) node indices
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

/// Nodes entered by two or more arcs.
std::set<std::string> shared_hierarchy_entries(const DfmSchema& schema);

}  // namespace dfmforge::core
