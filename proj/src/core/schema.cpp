#include "dfmforge/core/schema.hpp"

#include <algorithm>
#include <deque>

namespace dfmforge::core {

namespace {

constexpr std::string_view kSemiSuffix = " (SUM-AVG)";
constexpr std::string_view kNonSuffix = " (AVG)";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool listed(const std::vector<std::string>& v, std::string_view x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

const std::vector<std::size_t> kNoArcs;

}  // namespace

std::string_view additivity_suffix(Additivity level) {
  switch (level) {
    case Additivity::Additive: return "";
    case Additivity::SemiAdditive: return kSemiSuffix;
    case Additivity::NonAdditive: return kNonSuffix;
  }
  return "";
}

std::string_view to_string(Additivity level) {
  switch (level) {
    case Additivity::Additive: return "additive";
    case Additivity::SemiAdditive: return "semi_additive";
    case Additivity::NonAdditive: return "non_additive";
  }
  return "additive";
}

std::optional<Additivity> additivity_from_string(std::string_view text) {
  if (text == "additive") return Additivity::Additive;
  if (text == "semi_additive") return Additivity::SemiAdditive;
  if (text == "non_additive") return Additivity::NonAdditive;
  return std::nullopt;
}

std::string Measure::rendered() const { return name + std::string(additivity_suffix(additivity)); }

Measure split_measure_name(std::string_view rendered) {
  if (ends_with(rendered, kSemiSuffix) && rendered.size() > kSemiSuffix.size())
    return {std::string(rendered.substr(0, rendered.size() - kSemiSuffix.size())),
            Additivity::SemiAdditive};
  if (ends_with(rendered, kNonSuffix) && rendered.size() > kNonSuffix.size())
    return {std::string(rendered.substr(0, rendered.size() - kNonSuffix.size())),
            Additivity::NonAdditive};
  return {std::string(rendered), Additivity::Additive};
}

const Measure* DfmSchema::find_measure(std::string_view name) const {
  for (const auto& m : measures)
    if (m.name == name) return &m;
  for (const auto& m : measures)
    if (m.rendered() == name) return &m;
  return nullptr;
}

bool DfmSchema::is_measure_node(std::string_view name) const {
  return std::any_of(measures.begin(), measures.end(),
                     [&](const Measure& m) { return m.rendered() == name; });
}

bool DfmSchema::is_attribute(std::string_view name) const {
  if (name == fact || is_measure_node(name)) return false;
  return std::any_of(dependencies.begin(), dependencies.end(),
                     [&](const Dependency& d) { return d.from == name || d.to == name; });
}

bool DfmSchema::has_node(std::string_view name) const { return kind_of(name).has_value(); }

std::optional<NodeKind> DfmSchema::kind_of(std::string_view name) const {
  if (name == fact) return NodeKind::Fact;
  if (is_measure_node(name)) return NodeKind::Measure;
  if (is_attribute(name)) return NodeKind::Attribute;
  return std::nullopt;
}

bool DfmSchema::is_descriptive(std::string_view name) const { return listed(descriptive, name); }
bool DfmSchema::is_optional(std::string_view name) const { return listed(optional, name); }

std::vector<std::string> DfmSchema::attributes() const {
  std::set<std::string, std::less<>> excluded{fact};
  for (const auto& m : measures) excluded.insert(m.rendered());
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  auto visit = [&](const std::string& n) {
    if (excluded.count(n) || !seen.insert(n).second) return;
    out.push_back(n);
  };
  for (const auto& d : dependencies) {
    visit(d.from);
    visit(d.to);
  }
  return out;
}

std::vector<std::string> DfmSchema::nodes() const {
  std::vector<std::string> out{fact};
  for (const auto& m : measures) {
    auto r = m.rendered();
    if (!listed(out, r)) out.push_back(std::move(r));
  }
  for (auto& a : attributes()) out.push_back(std::move(a));
  return out;
}

std::vector<std::string> DfmSchema::dimensions() const {
  std::vector<std::string> out;
  for (const auto& d : dependencies) {
    if (d.from != fact || d.to == fact || is_measure_node(d.to) || listed(out, d.to)) continue;
    out.push_back(d.to);
  }
  return out;
}

bool structurally_equal(const DfmSchema& a, const DfmSchema& b) {
  if (a.fact != b.fact) return false;
  auto measure_key = [](const DfmSchema& s) {
    std::multiset<std::pair<std::string, int>> out;
    for (const auto& m : s.measures) out.emplace(m.name, static_cast<int>(m.additivity));
    return out;
  };
  auto arcs = [](const DfmSchema& s) {
    return std::multiset<Dependency>(s.dependencies.begin(), s.dependencies.end());
  };
  auto as_set = [](const std::vector<std::string>& v) { return std::set<std::string>(v.begin(), v.end()); };
  auto node_set = [&](const DfmSchema& s) { return as_set(s.nodes()); };
  return measure_key(a) == measure_key(b) && arcs(a) == arcs(b) &&
         as_set(a.descriptive) == as_set(b.descriptive) &&
         as_set(a.optional) == as_set(b.optional) && node_set(a) == node_set(b);
}

SchemaGraph::SchemaGraph(const DfmSchema& schema) : nodes_(schema.nodes()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i], i);
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  arcs_.reserve(schema.dependencies.size());
  for (std::size_t i = 0; i < schema.dependencies.size(); ++i) {
    const auto& d = schema.dependencies[i];
    auto f = index_.at(d.from);
    auto t = index_.at(d.to);
    arcs_.emplace_back(f, t);
    out_[f].push_back(i);
    in_[t].push_back(i);
  }
}

const std::vector<std::size_t>& SchemaGraph::out_arcs(const std::string& node) const {
  auto it = index_.find(node);
  return it == index_.end() ? kNoArcs : out_[it->second];
}

const std::vector<std::size_t>& SchemaGraph::in_arcs(const std::string& node) const {
  auto it = index_.find(node);
  return it == index_.end() ? kNoArcs : in_[it->second];
}

std::vector<std::string> SchemaGraph::children(const std::string& node) const {
  std::vector<std::string> out;
  for (auto arc : out_arcs(node)) {
    const auto& name = nodes_[arcs_[arc].second];
    if (!listed(out, name)) out.push_back(name);
  }
  return out;
}

std::vector<std::string> SchemaGraph::parents(const std::string& node) const {
  std::vector<std::string> out;
  for (auto arc : in_arcs(node)) {
    const auto& name = nodes_[arcs_[arc].first];
    if (!listed(out, name)) out.push_back(name);
  }
  return out;
}

std::set<std::string> SchemaGraph::reachable_from(const std::string& root) const {
  std::set<std::string> seen;
  auto it = index_.find(root);
  if (it == index_.end()) return seen;
  std::vector<bool> visited(nodes_.size(), false);
  std::deque<std::size_t> queue{it->second};
  visited[it->second] = true;
  while (!queue.empty()) {
    auto n = queue.front();
    queue.pop_front();
    seen.insert(nodes_[n]);
    for (auto arc : out_[n]) {
      auto next = arcs_[arc].second;
      if (!visited[next]) {
        visited[next] = true;
        queue.push_back(next);
      }
    }
  }
  return seen;
}

std::set<std::string> SchemaGraph::descendants(const std::string& root) const {
  auto out = reachable_from(root);
  out.erase(root);
  return out;
}

std::set<std::string> shared_hierarchy_entries(const DfmSchema& schema) {
  std::map<std::string, std::size_t> in_degree;
  for (const auto& d : schema.dependencies) ++in_degree[d.to];
  std::set<std::string> out;
  for (const auto& [node, degree] : in_degree)
    if (degree >= 2) out.insert(node);
  return out;
}

}  // namespace dfmforge::core
