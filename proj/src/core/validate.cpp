#include "dfmforge/core/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace dfmforge::core {

namespace {

std::string arc_label(const Dependency& d) {
  std::string s = d.from + " -> " + d.to;
  if (d.role) s += " [" + *d.role + "]";
  return s;
}

void check_cycles(const DfmSchema& schema, const SchemaGraph& graph, ValidationReport& report) {
  enum class Color { White, Grey, Black };
  std::map<std::string, Color> color;
  for (const auto& n : graph.nodes()) color[n] = Color::White;
  std::vector<std::string> stack;
  std::set<std::set<std::string>> reported;

  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    color[node] = Color::Grey;
    stack.push_back(node);
    for (auto arc : graph.out_arcs(node)) {
      const auto& next = schema.dependencies[arc].to;
      if (color[next] == Color::Grey) {
        auto begin = std::find(stack.begin(), stack.end(), next);
        std::set<std::string> members(begin, stack.end());
        if (reported.insert(members).second) {
          std::string path;
          for (auto it = begin; it != stack.end(); ++it) path += *it + " -> ";
          path += next;
          report.violations.push_back({ViolationCode::Cycle, next, "cycle: " + path});
        }
      } else if (color[next] == Color::White) {
        visit(next);
      }
    }
    stack.pop_back();
    color[node] = Color::Black;
  };
  for (const auto& n : graph.nodes())
    if (color[n] == Color::White) visit(n);
}

}  // namespace

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::Disconnected: return "Disconnected";
    case ViolationCode::Cycle: return "Cycle";
    case ViolationCode::FactHasParent: return "FactHasParent";
    case ViolationCode::DanglingMark: return "DanglingMark";
    case ViolationCode::FakeNode: return "FakeNode";
    case ViolationCode::DescriptiveWithChildren: return "DescriptiveWithChildren";
    case ViolationCode::DuplicateArc: return "DuplicateArc";
    case ViolationCode::RoleOutsideSharedHierarchy: return "RoleOutsideSharedHierarchy";
    case ViolationCode::MisplacedMeasure: return "MisplacedMeasure";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationCode code) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; }));
}

ValidationReport validate(const DfmSchema& schema, const ValidateOptions& options) {
  ValidationReport report;
  auto& out = report.violations;
  SchemaGraph graph(schema);

  for (const auto& d : schema.dependencies)
    if (d.to == schema.fact)
      out.push_back({ViolationCode::FactHasParent, arc_label(d), "arc enters the fact " + schema.fact});

  std::map<Dependency, int> seen_arcs;
  for (const auto& d : schema.dependencies)
    if (++seen_arcs[d] == 2)
      out.push_back({ViolationCode::DuplicateArc, arc_label(d), "arc listed more than once"});

  std::set<std::string> measure_names;
  for (const auto& m : schema.measures) {
    auto node = m.rendered();
    if (!measure_names.insert(m.name).second) {
      out.push_back({ViolationCode::MisplacedMeasure, node, "measure declared more than once"});
      continue;
    }
    std::size_t from_fact = 0;
    for (auto arc : graph.in_arcs(node)) {
      const auto& d = schema.dependencies[arc];
      if (d.from == schema.fact) {
        ++from_fact;
      } else {
        out.push_back({ViolationCode::MisplacedMeasure, node,
                       "measure " + node + " is the target of " + arc_label(d)});
      }
    }
    if (from_fact > 1)
      out.push_back({ViolationCode::MisplacedMeasure, node, "more than one arc from the fact to " + node});
    if (graph.out_degree(node) > 0)
      out.push_back({ViolationCode::MisplacedMeasure, node, "measure " + node + " has outgoing arcs"});
  }

  auto attributes = schema.attributes();
  for (const auto& a : attributes) {
    auto base = split_measure_name(a).name;
    for (const auto& m : schema.measures) {
      if (m.name == base) {
        out.push_back({ViolationCode::FakeNode, a,
                       "'" + a + "' looks like measure '" + m.rendered() + "' but does not match its name"});
        break;
      }
    }
  }

  auto check_marks = [&](const std::vector<std::string>& marks, std::string_view kind) {
    for (const auto& n : marks)
      if (std::find(attributes.begin(), attributes.end(), n) == attributes.end())
        out.push_back({ViolationCode::DanglingMark, n,
                       std::string(kind) + " mark on '" + n + "', which is not an attribute"});
  };
  check_marks(schema.descriptive, "descriptive");
  check_marks(schema.optional, "optional");

  for (const auto& n : schema.descriptive)
    if (graph.out_degree(n) > 0)
      out.push_back({ViolationCode::DescriptiveWithChildren, n, "descriptive attribute '" + n + "' has children"});

  check_cycles(schema, graph, report);

  auto reachable = graph.reachable_from(schema.fact);
  for (const auto& n : graph.nodes())
    if (!reachable.count(n))
      out.push_back({ViolationCode::Disconnected, n, "'" + n + "' is not reachable from the fact"});

  if (!options.allow_roles_outside_shared) {
    for (const auto& d : schema.dependencies)
      if (d.role && graph.in_degree(d.to) < 2)
        out.push_back({ViolationCode::RoleOutsideSharedHierarchy, arc_label(d),
                       "role on an arc into '" + d.to + "', which is not shared"});
  }
  return report;
}

nlohmann::json to_json(const ValidationReport& report) {
  auto arr = nlohmann::json::array();
  for (const auto& v : report.violations)
    arr.push_back({{"code", std::string(to_string(v.code))}, {"subject", v.subject}, {"message", v.message}});
  return arr;
}

std::string to_text(const ValidationReport& report) {
  if (report.ok()) return "ok\n";
  std::ostringstream out;
  for (const auto& v : report.violations) out << to_string(v.code) << ": " << v.message << "\n";
  return out.str();
}

}  // namespace dfmforge::core
