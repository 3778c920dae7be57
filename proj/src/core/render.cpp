#include "dfmforge/core/render.hpp"

#include <functional>
#include <set>
#include <sstream>

namespace dfmforge::core {

namespace {

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

// Record labels treat these as structure.
std::string record_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::string_view("{}|<>\"\\").find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const DfmSchema& schema) {
  std::ostringstream out;
  out << "digraph dfm {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n";
  std::string label = "{" + record_escape(schema.fact);
  if (!schema.measures.empty()) {
    label += "|";
    for (std::size_t i = 0; i < schema.measures.size(); ++i)
      label += (i ? "\\l" : "") + record_escape(schema.measures[i].rendered());
    label += "\\l";
  }
  label += "}";
  out << "  " << dot_quote(schema.fact) << " [shape=record, label=" << dot_quote(label) << "];\n";
  for (const auto& a : schema.attributes()) {
    out << "  " << dot_quote(a) << " [";
    if (schema.is_descriptive(a))
      out << "shape=plaintext";
    else
      out << "shape=circle, fixedsize=false";
    if (schema.is_optional(a)) out << ", style=dashed";
    out << "];\n";
  }
  for (const auto& d : schema.dependencies) {
    if (schema.is_measure_node(d.to) && d.from == schema.fact) continue;
    out << "  " << dot_quote(d.from) << " -> " << dot_quote(d.to);
    if (d.role) out << " [label=" << dot_quote(*d.role) << "]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

std::string to_tree_text(const DfmSchema& schema) {
  SchemaGraph graph(schema);
  std::ostringstream out;
  out << schema.fact << "\n";
  for (const auto& m : schema.measures) out << "  * " << m.rendered() << "\n";
  std::set<std::string> printed;
  std::function<void(const std::string&, int)> walk = [&](const std::string& node, int depth) {
    for (auto arc : graph.out_arcs(node)) {
      const auto& d = schema.dependencies[arc];
      if (schema.is_measure_node(d.to)) continue;
      out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "- " << d.to;
      if (d.role) out << " [" << *d.role << "]";
      if (schema.is_descriptive(d.to)) out << " (descriptive)";
      if (schema.is_optional(d.to)) out << " (optional)";
      if (!printed.insert(d.to).second) {
        out << " ^\n";
        continue;
      }
      out << "\n";
      walk(d.to, depth + 1);
    }
  };
  walk(schema.fact, 1);
  return out.str();
}

}  // namespace dfmforge::core
