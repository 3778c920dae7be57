#include "dfmforge/refine/ops.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace dfmforge::refine {

using core::Dependency;
using dfmforge::Error;
using dfmforge::ErrorCode;
using core::Measure;
using core::SchemaGraph;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ends_with_ci(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && lower(s.substr(s.size() - suffix.size())) == suffix;
}

void add_unique(std::vector<std::string>& v, const std::string& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

void erase_value(std::vector<std::string>& v, const std::string& x) {
  v.erase(std::remove(v.begin(), v.end(), x), v.end());
}

void add_arc(std::vector<Dependency>& deps, Dependency d) {
  if (std::find(deps.begin(), deps.end(), d) == deps.end()) deps.push_back(std::move(d));
}

// Marks are name lists; renaming keeps position and drops repeats.
std::vector<std::string> map_names(const std::vector<std::string>& names,
                                   const std::map<std::string, std::string>& mapping) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    auto it = mapping.find(n);
    add_unique(out, it == mapping.end() ? n : it->second);
  }
  return out;
}

void require_attribute(const DfmSchema& s, const std::string& name) {
  if (s.is_attribute(name)) return;
  if (name == s.fact || s.find_measure(name))
    throw Error(ErrorCode::UnknownNode, "'" + name + "' is not an attribute", name);
  throw Error(ErrorCode::UnknownNode, "no node named '" + name + "'", name);
}

// A name usable for a new (or renamed) attribute. `ignore` lists nodes that
// are about to disappear and may be reused.
void require_fresh(const DfmSchema& s, const std::string& name, const std::set<std::string>& ignore = {}) {
  if (name.find_first_not_of(" \t") == std::string::npos)
    throw Error(ErrorCode::InvalidName, "empty node name", name);
  if (!ignore.count(name) && s.has_node(name))
    throw Error(ErrorCode::NameCollision, "node '" + name + "' already exists", name);
  auto base = core::split_measure_name(name).name;
  for (const auto& m : s.measures)
    if (m.name == base || m.name == name)
      throw Error(ErrorCode::NameCollision, "'" + name + "' clashes with measure '" + m.rendered() + "'", name);
}

void rename_endpoints(DfmSchema& s, const std::string& from, const std::string& to) {
  for (auto& d : s.dependencies) {
    if (d.from == from) d.from = to;
    if (d.to == from) d.to = to;
  }
}

void rename_marks(DfmSchema& s, const std::string& from, const std::string& to) {
  std::map<std::string, std::string> m{{from, to}};
  s.descriptive = map_names(s.descriptive, m);
  s.optional = map_names(s.optional, m);
}

// Roles only make sense on arcs into shared nodes. After a rewrite, arcs into
// `touched` targets that are no longer shared lose their role.
void strip_lonely_roles(DfmSchema& s, const std::set<std::string>& touched) {
  std::map<std::string, int> indeg;
  for (const auto& d : s.dependencies) indeg[d.to] += 1;
  for (auto& d : s.dependencies)
    if (d.role && touched.count(d.to) && indeg[d.to] < 2) d.role.reset();
}

bool is_separator(char c) { return c == '.' || c == '_' || c == ' ' || c == '-'; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

// Drops the part of `name` it shares with `root` up to a word boundary:
// PickUpMonth under PickUpDate -> Month, DATES.month under DATES.date -> month.
std::string strip_shared_prefix(const std::string& root, const std::string& name) {
  std::size_t k = 0;
  while (k < root.size() && k < name.size() && root[k] == name[k]) ++k;
  auto boundary = [&](std::size_t b) {
    if (b == 0 || b >= name.size()) return b == 0;
    if (is_separator(name[b - 1])) return true;
    bool root_turns = b == root.size() || is_upper(root[b]) || is_separator(root[b]);
    return is_upper(name[b]) && root_turns;
  };
  while (k > 0 && !boundary(k)) --k;
  std::string rest = name.substr(k);
  auto first = rest.find_first_not_of("._- ");
  rest = first == std::string::npos ? std::string() : rest.substr(first);
  return rest.empty() ? name : rest;
}

std::string normalized(const std::string& s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80)
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string kind_name(const RefinementOp& op) {
  static constexpr const char* kNames[] = {"rename",        "set_additivity",          "mark_descriptive",
                                           "discretize",    "mark_optional",           "complete_time_hierarchy",
                                           "remove_attribute", "merge_shared_hierarchy"};
  return kNames[op.index()];
}

DfmSchema rename(const DfmSchema& schema, const std::string& old_name, const std::string& new_name) {
  DfmSchema s = schema;
  if (old_name == s.fact) {
    if (new_name == old_name) return s;
    require_fresh(s, new_name);
    s.fact = new_name;
    rename_endpoints(s, old_name, new_name);
    return s;
  }
  if (const Measure* found = s.find_measure(old_name)) {
    auto split = core::split_measure_name(new_name);
    if (split.name != new_name)
      throw Error(ErrorCode::InvalidName,
                  "measure names carry no additivity suffix; use set_additivity instead", new_name);
    if (new_name == found->name) return s;
    Measure renamed{new_name, found->additivity};
    require_fresh(s, new_name);
    if (s.has_node(renamed.rendered()))
      throw Error(ErrorCode::NameCollision, "node '" + renamed.rendered() + "' already exists", new_name);
    for (const auto& a : s.attributes())
      if (core::split_measure_name(a).name == new_name)
        throw Error(ErrorCode::NameCollision, "'" + new_name + "' clashes with attribute '" + a + "'", new_name);
    auto old_rendered = found->rendered();
    for (auto& m : s.measures)
      if (m.name == found->name) m.name = new_name;
    rename_endpoints(s, old_rendered, renamed.rendered());
    return s;
  }
  require_attribute(s, old_name);
  if (new_name == old_name) return s;
  require_fresh(s, new_name);
  rename_endpoints(s, old_name, new_name);
  rename_marks(s, old_name, new_name);
  return s;
}

DfmSchema set_additivity(const DfmSchema& schema, const std::string& measure, core::Additivity level) {
  DfmSchema s = schema;
  const Measure* found = s.find_measure(measure);
  if (!found) throw Error(ErrorCode::UnknownMeasure, "no measure named '" + measure + "'", measure);
  if (found->additivity == level) return s;
  Measure updated{found->name, level};
  if (s.has_node(updated.rendered()))
    throw Error(ErrorCode::NameCollision, "node '" + updated.rendered() + "' already exists", updated.rendered());
  auto old_rendered = found->rendered();
  for (auto& m : s.measures)
    if (m.name == updated.name) m.additivity = level;
  rename_endpoints(s, old_rendered, updated.rendered());
  return s;
}

DfmSchema mark_descriptive(const DfmSchema& schema, const std::string& attr) {
  require_attribute(schema, attr);
  for (const auto& d : schema.dependencies)
    if (d.from == attr)
      throw Error(ErrorCode::DescriptiveWithChildren, "'" + attr + "' has children", attr);
  DfmSchema s = schema;
  add_unique(s.descriptive, attr);
  return s;
}

DfmSchema discretize(const DfmSchema& schema, const std::string& attr, const std::string& range_name,
                     DiscretizeMode mode) {
  require_attribute(schema, attr);
  require_fresh(schema, range_name);
  DfmSchema s = schema;
  erase_value(s.descriptive, attr);
  if (mode == DiscretizeMode::Replace) {
    rename_endpoints(s, attr, range_name);
    rename_marks(s, attr, range_name);
  } else {
    s.dependencies.push_back({attr, range_name, std::nullopt});
  }
  return s;
}

DfmSchema mark_optional(const DfmSchema& schema, const std::string& attr) {
  require_attribute(schema, attr);
  DfmSchema s = schema;
  add_unique(s.optional, attr);
  return s;
}

DfmSchema complete_time_hierarchy(const DfmSchema& schema, const std::string& date_attr) {
  require_attribute(schema, date_attr);
  if (schema.is_descriptive(date_attr))
    throw Error(ErrorCode::DescriptiveWithChildren, "'" + date_attr + "' is descriptive", date_attr);

  auto attrs = schema.attributes();
  auto date_like = std::count_if(attrs.begin(), attrs.end(),
                                 [](const std::string& a) { return lower(a).find("date") != std::string::npos; });
  std::string prefix;
  if (date_like > 1) {
    auto dot = date_attr.rfind('.');
    prefix = dot == std::string::npos ? date_attr : date_attr.substr(dot + 1);
    if (ends_with_ci(prefix, "date")) prefix.resize(prefix.size() - 4);
  }

  DfmSchema s = schema;
  SchemaGraph graph(s);
  auto child_ending = [&](const std::string& node, std::string_view suffix) -> std::optional<std::string> {
    for (const auto& c : graph.children(node))
      if (ends_with_ci(c, suffix) && s.is_attribute(c)) return c;
    return std::nullopt;
  };

  auto month = child_ending(date_attr, "month");
  std::optional<std::string> year;
  if (month) {
    year = child_ending(*month, "year");
  } else {
    auto month_name = prefix + "Month";
    require_fresh(s, month_name);
    month = month_name;
    year = child_ending(date_attr, "year");
    if (year) {
      // Date -> Year becomes Date -> Month -> Year.
      for (auto& d : s.dependencies)
        if (d.from == date_attr && d.to == *year) d.from = month_name;
    }
    s.dependencies.push_back({date_attr, month_name, std::nullopt});
  }
  if (!year) {
    if (s.is_descriptive(*month))
      throw Error(ErrorCode::DescriptiveWithChildren, "'" + *month + "' is descriptive", *month);
    auto year_name = prefix + "Year";
    require_fresh(s, year_name);
    s.dependencies.push_back({*month, year_name, std::nullopt});
  }
  return s;
}

DfmSchema merge_shared_hierarchy(const DfmSchema& schema, const std::vector<std::string>& attrs,
                                 const std::string& merged, const std::vector<std::string>& roles) {
  if (attrs.size() < 2 || attrs.size() != roles.size())
    throw Error(ErrorCode::RoleCountMismatch,
                "need at least two attributes and exactly one role per attribute", merged);
  if (std::set<std::string>(attrs.begin(), attrs.end()).size() != attrs.size())
    throw Error(ErrorCode::RoleCountMismatch, "an attribute cannot be merged with itself", merged);
  if (std::set<std::string>(roles.begin(), roles.end()).size() != roles.size() ||
      std::any_of(roles.begin(), roles.end(), [](const std::string& r) { return r.empty(); }))
    throw Error(ErrorCode::RoleCountMismatch, "roles must be distinct and non-empty", merged);
  for (const auto& a : attrs) require_attribute(schema, a);

  SchemaGraph graph(schema);
  std::set<std::string> roots(attrs.begin(), attrs.end());

  struct Copy {
    std::map<std::string, std::string> by_key;  // normalized remainder -> node
    std::set<std::tuple<std::string, std::string, std::optional<std::string>>> arcs;
    std::map<std::string, std::pair<bool, bool>> marks;
  };
  std::vector<Copy> copies(attrs.size());
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const auto& root = attrs[i];
    auto below = graph.descendants(root);
    for (const auto& other : attrs)
      if (other != root && below.count(other))
        throw Error(ErrorCode::NonIsomorphicSubhierarchies, "'" + other + "' lies below '" + root + "'", other);
    std::map<std::string, std::string> key_of{{root, ""}};
    for (const auto& n : below) {
      auto key = normalized(strip_shared_prefix(root, n));
      if (!copies[i].by_key.emplace(key, n).second)
        throw Error(ErrorCode::NonIsomorphicSubhierarchies,
                    "'" + n + "' and '" + copies[i].by_key[key] + "' are indistinguishable below '" + root + "'", n);
      key_of[n] = key;
      copies[i].marks[key] = {schema.is_descriptive(n), schema.is_optional(n)};
    }
    for (const auto& d : schema.dependencies)
      if (key_of.count(d.from)) copies[i].arcs.insert({key_of[d.from], key_of.at(d.to), d.role});
  }
  for (std::size_t i = 1; i < copies.size(); ++i) {
    bool same_nodes = copies[i].by_key.size() == copies[0].by_key.size() &&
                      std::equal(copies[i].by_key.begin(), copies[i].by_key.end(), copies[0].by_key.begin(),
                                 [](const auto& a, const auto& b) { return a.first == b.first; });
    if (!same_nodes || copies[i].arcs != copies[0].arcs || copies[i].marks != copies[0].marks)
      throw Error(ErrorCode::NonIsomorphicSubhierarchies,
                  "sub-hierarchies of '" + attrs[0] + "' and '" + attrs[i] + "' differ", attrs[i]);
  }

  std::map<std::string, std::string> mapping;
  for (const auto& a : attrs) mapping[a] = merged;
  std::set<std::string> vanishing = roots;
  for (const auto& [key, first] : copies[0].by_key) {
    bool one_node = std::all_of(copies.begin(), copies.end(),
                                [&](const Copy& c) { return c.by_key.at(key) == first; });
    if (one_node) continue;
    auto unified = strip_shared_prefix(attrs[0], first);
    for (const auto& c : copies) {
      mapping[c.by_key.at(key)] = unified;
      vanishing.insert(c.by_key.at(key));
    }
  }
  require_fresh(schema, merged, roots);
  for (const auto& [from, to] : mapping) {
    if (roots.count(from)) continue;
    if (to == merged) throw Error(ErrorCode::NameCollision, "'" + to + "' is also the merged node name", to);
    require_fresh(schema, to, vanishing);
  }

  DfmSchema s = schema;
  s.dependencies.clear();
  std::set<std::string> touched;
  auto role_index = [&](const std::string& n) -> std::optional<std::size_t> {
    auto it = std::find(attrs.begin(), attrs.end(), n);
    if (it == attrs.end()) return std::nullopt;
    return static_cast<std::size_t>(it - attrs.begin());
  };
  for (const auto& d : schema.dependencies) {
    Dependency nd = d;
    if (auto it = mapping.find(d.from); it != mapping.end()) nd.from = it->second;
    if (auto it = mapping.find(d.to); it != mapping.end()) nd.to = it->second;
    if (auto i = role_index(d.to)) nd.role = roles[*i];
    if (nd == d) {
      s.dependencies.push_back(nd);
    } else {
      touched.insert(nd.to);
      add_arc(s.dependencies, nd);
    }
  }
  s.descriptive = map_names(s.descriptive, mapping);
  s.optional = map_names(s.optional, mapping);
  touched.erase(merged);
  strip_lonely_roles(s, touched);
  return s;
}

DfmSchema remove_attribute(const DfmSchema& schema, const std::string& attr) {
  if (attr == schema.fact) throw Error(ErrorCode::CannotRemoveFact, "the fact cannot be removed", attr);
  if (schema.find_measure(attr))
    throw Error(ErrorCode::CannotRemoveMeasure, "'" + attr + "' is a measure", attr);
  require_attribute(schema, attr);

  std::vector<Dependency> in, out;
  for (const auto& d : schema.dependencies) {
    if (d.to == attr) in.push_back(d);
    if (d.from == attr) out.push_back(d);
  }
  std::map<std::string, int> indeg;
  for (const auto& d : schema.dependencies) indeg[d.to] += 1;

  DfmSchema s = schema;
  std::set<std::string> dropped{attr};
  std::set<std::string> touched;
  std::vector<Dependency> rewired;
  for (const auto& child_arc : out) {
    const auto& c = child_arc.to;
    if (schema.is_descriptive(c)) {
      // A descriptive child reachable through another parent stays put.
      if (indeg[c] == 1) dropped.insert(c);
      else touched.insert(c);
      continue;
    }
    touched.insert(c);
    for (const auto& parent_arc : in)
      rewired.push_back({parent_arc.from, c, parent_arc.role ? parent_arc.role : child_arc.role});
  }
  std::erase_if(s.dependencies, [&](const Dependency& d) { return dropped.count(d.from) || dropped.count(d.to); });
  for (auto& d : rewired) add_arc(s.dependencies, std::move(d));
  for (const auto& n : dropped) {
    erase_value(s.descriptive, n);
    erase_value(s.optional, n);
  }
  strip_lonely_roles(s, touched);
  return s;
}

DfmSchema apply_op(const DfmSchema& schema, const RefinementOp& op) {
  return std::visit(
      [&](const auto& o) -> DfmSchema {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Rename>) return rename(schema, o.old_name, o.new_name);
        else if constexpr (std::is_same_v<T, SetAdditivity>) return set_additivity(schema, o.measure, o.level);
        else if constexpr (std::is_same_v<T, MarkDescriptive>) return mark_descriptive(schema, o.attr);
        else if constexpr (std::is_same_v<T, Discretize>) return discretize(schema, o.attr, o.range_name, o.mode);
        else if constexpr (std::is_same_v<T, MarkOptional>) return mark_optional(schema, o.attr);
        else if constexpr (std::is_same_v<T, CompleteTimeHierarchy>) return complete_time_hierarchy(schema, o.date_attr);
        else if constexpr (std::is_same_v<T, RemoveAttribute>) return remove_attribute(schema, o.attr);
        else return merge_shared_hierarchy(schema, o.attrs, o.merged, o.roles);
      },
      op);
}

}  // namespace dfmforge::refine
