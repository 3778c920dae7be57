#include "dfmforge/eval/diff.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "dfmforge/core/error.hpp"
#include "dfmforge/core/validate.hpp"

namespace dfmforge::eval {

using core::DfmSchema;
using core::NodeKind;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> kCategoryNames = {
    "Renaming", "Additivity", "DescriptiveOrDiscretized", "Optional", "TimeHierarchy", "Removal", "Structure"};

bool is_fake(const DfmSchema& s, const std::string& attr) {
  auto base = core::split_measure_name(attr).name;
  return std::any_of(s.measures.begin(), s.measures.end(), [&](const auto& m) { return m.name == base; });
}

bool is_time_level(const std::string& name) {
  auto n = normalize_name(name, Normalization::CaseInsensitiveAlnum);
  return n.find("month") != std::string::npos || n.find("year") != std::string::npos;
}

// Name used for matching: measures by base name, everything else as is.
std::string match_key(const DfmSchema& s, const std::string& node, Normalization mode) {
  if (const auto* m = s.find_measure(node); m && s.is_measure_node(node)) return normalize_name(m->name, mode);
  return normalize_name(node, mode);
}

std::vector<std::string> non_empty_nodes(const DfmSchema& s) {
  std::vector<std::string> out;
  for (auto& n : s.nodes())
    if (!n.empty()) out.push_back(std::move(n));
  return out;
}

// Matchable nodes of one kind, sorted.
std::vector<std::string> pool(const DfmSchema& s, NodeKind kind, bool drop_fake) {
  std::vector<std::string> out;
  for (const auto& n : non_empty_nodes(s)) {
    if (s.kind_of(n) != kind) continue;
    if (drop_fake && kind == NodeKind::Attribute && is_fake(s, n)) continue;
    out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string arc_text(const std::string& from, const std::string& to, const std::string& role) {
  auto s = from + " -> " + to;
  if (!role.empty()) s += " [" + role + "]";
  return s;
}

std::string marked(const std::string& name, bool mark, std::string_view what) {
  return mark ? name + " (" + std::string(what) + ")" : name;
}

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 1.0 : static_cast<double>(num) / den; }

struct Scorer {
  const DfmSchema& c;
  const DfmSchema& t;
  const MatchConfig& cfg;

  // Cost of pairing two nodes of the same kind, plus its records.
  void pair(const std::string& cn, const std::string& tn, std::vector<Discrepancy>& out) const {
    if (c.is_measure_node(cn)) {
      const auto* mc = c.find_measure(cn);
      const auto* mt = t.find_measure(tn);
      if (mc->name != mt->name) out.push_back({Category::Renaming, mt->name, mc->name});
      if (mc->additivity != mt->additivity) out.push_back({Category::Additivity, mt->rendered(), mc->rendered()});
      return;
    }
    if (cn != tn) out.push_back({Category::Renaming, tn, cn});
    if (cn == c.fact) return;
    if (c.is_descriptive(cn) != t.is_descriptive(tn))
      out.push_back({Category::DescriptiveOrDiscretized, marked(tn, t.is_descriptive(tn), "descriptive"),
                     marked(cn, c.is_descriptive(cn), "descriptive")});
    if (c.is_optional(cn) != t.is_optional(tn))
      out.push_back({Category::Optional, marked(tn, t.is_optional(tn), "optional"),
                     marked(cn, c.is_optional(cn), "optional")});
  }

  Category unmatched_category(const DfmSchema& s, const std::string& n) const {
    if (s.is_measure_node(n)) return Category::Structure;
    if (&s == &c && is_fake(s, n)) return Category::Structure;
    if (is_time_level(n)) return Category::TimeHierarchy;
    return Category::Removal;
  }

  int cost(const std::vector<Discrepancy>& records) const {
    int total = 0;
    for (const auto& r : records) total += cfg.weight(r.category);
    return total;
  }
};

}  // namespace

std::string_view to_string(Category category) { return kCategoryNames[static_cast<std::size_t>(category)]; }

std::optional<Category> category_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == text) return kCategories[i];
  return std::nullopt;
}

std::string_view to_string(Normalization mode) {
  return mode == Normalization::Exact ? "exact" : "case_insensitive_alnum";
}

std::string normalize_name(std::string_view name, Normalization mode) {
  if (mode == Normalization::Exact) return std::string(name);
  std::string out;
  for (unsigned char ch : name) {
    if (ch >= 0x80 || std::isalnum(ch)) out += static_cast<char>(std::tolower(ch));
  }
  return out;
}

int DiffReport::count(Category c) const {
  auto it = errors_by_category.find(c);
  return it == errors_by_category.end() ? 0 : it->second;
}

void check_ground_truth(const GroundTruthSet& truth) {
  if (truth.alternatives.empty()) throw Error(ErrorCode::EmptyGroundTruth, "the ground truth has no alternatives");
  for (std::size_t i = 0; i < truth.alternatives.size(); ++i) {
    auto report = core::validate(truth.alternatives[i]);
    if (!report.ok())
      throw Error(ErrorCode::Precondition,
                  "ground-truth alternative " + std::to_string(i) + " is not valid: " + core::to_text(report),
                  std::to_string(i));
  }
}

NodeMapping match_nodes(const DfmSchema& candidate, const DfmSchema& truth, const MatchConfig& cfg) {
  NodeMapping mapping;
  if (!candidate.fact.empty() && !truth.fact.empty()) mapping[candidate.fact] = truth.fact;
  const auto mode = cfg.name_normalization;

  for (auto kind : {NodeKind::Measure, NodeKind::Attribute}) {
    auto cs = pool(candidate, kind, true);
    auto ts = pool(truth, kind, false);
    std::set<std::string> used;

    std::vector<std::string> rest_c;
    for (const auto& cn : cs) {
      auto key = match_key(candidate, cn, mode);
      bool paired = false;
      for (const auto& tn : ts) {
        if (used.count(tn) || match_key(truth, tn, mode) != key) continue;
        mapping[cn] = tn;
        used.insert(tn);
        paired = true;
        break;
      }
      if (!paired) rest_c.push_back(cn);
    }

    std::vector<std::string> rest_t;
    for (const auto& tn : ts)
      if (!used.count(tn)) rest_t.push_back(tn);
    auto related = [&](const std::string& cn, const std::string& tn) {
      auto a = match_key(candidate, cn, mode);
      auto b = match_key(truth, tn, mode);
      if (a.empty() || b.empty()) return false;
      return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
    };
    for (const auto& cn : rest_c) {
      const std::string* only = nullptr;
      int hits = 0;
      for (const auto& tn : rest_t)
        if (related(cn, tn)) {
          ++hits;
          only = &tn;
        }
      if (hits != 1) continue;
      int back = 0;
      for (const auto& other : rest_c)
        if (related(other, *only)) ++back;
      if (back == 1) mapping[cn] = *only;
    }
  }
  return mapping;
}

DiffReport score(const DfmSchema& candidate, const DfmSchema& truth, const NodeMapping& mapping,
                 const MatchConfig& cfg) {
  Scorer sc{candidate, truth, cfg};
  DiffReport r;
  for (auto c : kCategories) r.errors_by_category[c] = 0;

  auto cand_nodes = non_empty_nodes(candidate);
  auto truth_nodes = non_empty_nodes(truth);
  std::set<std::string> image;
  for (const auto& [cn, tn] : mapping) image.insert(tn);

  for (const auto& cn : cand_nodes) {
    auto it = mapping.find(cn);
    if (it != mapping.end())
      sc.pair(cn, it->second, r.detail);
    else
      r.detail.push_back({sc.unmatched_category(candidate, cn), "", cn});
  }
  for (const auto& tn : truth_nodes)
    if (!image.count(tn)) r.detail.push_back({sc.unmatched_category(truth, tn), tn, ""});

  // Arcs are compared only where both endpoints are matched; arcs touching
  // an unmatched node are already paid for by that node.
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::vector<std::string>> truth_arcs;
  for (const auto& d : truth.dependencies)
    if (image.count(d.from) && image.count(d.to)) truth_arcs[{d.from, d.to}].push_back(d.role.value_or(""));
  std::map<Key, std::vector<const core::Dependency*>> cand_arcs;
  for (const auto& d : candidate.dependencies) {
    auto f = mapping.find(d.from);
    auto t = mapping.find(d.to);
    if (f == mapping.end() || t == mapping.end()) continue;
    cand_arcs[{f->second, t->second}].push_back(&d);
  }

  std::size_t matched_arcs = 0;
  for (const auto& [key, arcs] : cand_arcs) {
    auto tr = truth_arcs.count(key) ? truth_arcs.at(key) : std::vector<std::string>{};
    std::size_t m = std::min(arcs.size(), tr.size());
    matched_arcs += m;
    // Pair equal roles first, then whatever is left.
    std::multiset<std::string> pending(tr.begin(), tr.end());
    std::vector<const core::Dependency*> odd;
    for (const auto* d : arcs) {
      auto hit = pending.find(d->role.value_or(""));
      if (hit != pending.end())
        pending.erase(hit);
      else
        odd.push_back(d);
    }
    auto left = pending.begin();
    for (const auto* d : odd) {
      auto found = arc_text(d->from, d->to, d->role.value_or(""));
      if (left != pending.end()) {
        r.detail.push_back({Category::Structure, arc_text(key.first, key.second, *left), found});
        ++left;
      } else {
        r.detail.push_back({Category::Structure, "", found});
      }
    }
    for (; left != pending.end(); ++left)
      r.detail.push_back({Category::Structure, arc_text(key.first, key.second, *left), ""});
  }
  for (const auto& [key, roles] : truth_arcs) {
    if (cand_arcs.count(key)) continue;
    for (const auto& role : roles) r.detail.push_back({Category::Structure, arc_text(key.first, key.second, role), ""});
  }

  for (const auto& d : r.detail) {
    r.errors_by_category[d.category] += 1;
    r.total += cfg.weight(d.category);
  }
  r.node_precision = cand_nodes.empty() ? 1.0 : ratio(mapping.size(), cand_nodes.size());
  r.node_recall = cand_nodes.empty() ? 0.0 : ratio(mapping.size(), truth_nodes.size());
  r.arc_precision = ratio(matched_arcs, candidate.dependencies.size());
  r.arc_recall = ratio(matched_arcs, truth.dependencies.size());
  return r;
}

NodeMapping match_nodes_exhaustive(const DfmSchema& candidate, const DfmSchema& truth, const MatchConfig& cfg,
                                   std::size_t max_nodes) {
  auto cand_nodes = non_empty_nodes(candidate);
  auto truth_nodes = non_empty_nodes(truth);
  if (cand_nodes.size() > max_nodes || truth_nodes.size() > max_nodes)
    throw Error(ErrorCode::MatcherLimit, "exhaustive matching is limited to " + std::to_string(max_nodes) +
                                             " nodes per schema (got " + std::to_string(cand_nodes.size()) + " and " +
                                             std::to_string(truth_nodes.size()) + ")");

  Scorer sc{candidate, truth, cfg};
  NodeMapping best = match_nodes(candidate, truth, cfg);
  int best_total = score(candidate, truth, best, cfg).total;

  NodeMapping current;
  if (!candidate.fact.empty() && !truth.fact.empty()) current[candidate.fact] = truth.fact;
  std::vector<std::string> order;
  for (const auto& n : cand_nodes)
    if (n != candidate.fact) order.push_back(n);
  std::sort(order.begin(), order.end());

  std::map<std::pair<std::string, std::string>, int> truth_arc_count;
  for (const auto& d : truth.dependencies) truth_arc_count[{d.from, d.to}] += 1;

  std::set<std::string> used;
  std::map<std::pair<std::string, std::string>, int> placed;

  // Extra arcs created by deciding `node`: candidate arcs between it and
  // already decided, matched nodes that the truth cannot absorb.
  auto extra_arcs = [&](const std::string& node, std::vector<std::pair<std::string, std::string>>& added) {
    int extra = 0;
    for (const auto& d : candidate.dependencies) {
      if (d.from != node && d.to != node) continue;
      auto f = current.find(d.from);
      auto t = current.find(d.to);
      if (f == current.end() || t == current.end()) continue;
      std::pair<std::string, std::string> key{f->second, t->second};
      added.push_back(key);
      auto it = truth_arc_count.find(key);
      if (++placed[key] > (it == truth_arc_count.end() ? 0 : it->second)) ++extra;
    }
    return extra;
  };
  auto undo = [&](const std::vector<std::pair<std::string, std::string>>& added) {
    for (const auto& k : added) placed[k] -= 1;
  };

  std::function<void(std::size_t, int)> search = [&](std::size_t i, int bound) {
    if (bound >= best_total) return;
    if (i == order.size()) {
      int total = score(candidate, truth, current, cfg).total;
      if (total < best_total) {
        best_total = total;
        best = current;
      }
      return;
    }
    const auto& cn = order[i];
    auto kind = candidate.kind_of(cn);
    std::vector<std::pair<int, std::string>> options;
    if (!(kind == NodeKind::Attribute && is_fake(candidate, cn))) {
      for (const auto& tn : truth_nodes) {
        if (used.count(tn) || truth.kind_of(tn) != kind) continue;
        std::vector<Discrepancy> rec;
        sc.pair(cn, tn, rec);
        options.emplace_back(sc.cost(rec), tn);
      }
      std::stable_sort(options.begin(), options.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    for (const auto& [cost, tn] : options) {
      current[cn] = tn;
      used.insert(tn);
      std::vector<std::pair<std::string, std::string>> added;
      int extra = extra_arcs(cn, added) * cfg.weight(Category::Structure);
      search(i + 1, bound + cost + extra);
      undo(added);
      used.erase(tn);
      current.erase(cn);
    }
    search(i + 1, bound + cfg.weight(sc.unmatched_category(candidate, cn)));
  };
  search(0, 0);
  return best;
}

namespace {

DiffReport best_of(const DfmSchema& candidate, const GroundTruthSet& truth, const MatchConfig& cfg,
                   const std::function<NodeMapping(const DfmSchema&, const DfmSchema&)>& matcher) {
  if (truth.alternatives.empty()) throw Error(ErrorCode::EmptyGroundTruth, "the ground truth has no alternatives");
  for (int w : cfg.weights)
    if (w < 0) throw Error(ErrorCode::Precondition, "category weights must be non-negative");
  std::optional<DiffReport> best;
  for (std::size_t i = 0; i < truth.alternatives.size(); ++i) {
    const auto& alt = truth.alternatives[i];
    auto report = score(candidate, alt, matcher(candidate, alt), cfg);
    report.alternative = i;
    if (!best || report.total < best->total) best = std::move(report);
  }
  return *best;
}

}  // namespace

DiffReport diff(const DfmSchema& candidate, const GroundTruthSet& truth, const MatchConfig& cfg) {
  return best_of(candidate, truth, cfg,
                 [&](const DfmSchema& c, const DfmSchema& t) { return match_nodes(c, t, cfg); });
}

DiffReport diff_exhaustive(const DfmSchema& candidate, const GroundTruthSet& truth, const MatchConfig& cfg) {
  return best_of(candidate, truth, cfg,
                 [&](const DfmSchema& c, const DfmSchema& t) { return match_nodes_exhaustive(c, t, cfg); });
}

json to_json(const DiffReport& report) {
  json counts = json::object();
  for (auto c : kCategories) counts[std::string(to_string(c))] = report.count(c);
  json detail = json::array();
  for (const auto& d : report.detail)
    detail.push_back({{"category", std::string(to_string(d.category))}, {"expected", d.expected}, {"found", d.found}});
  return {{"total", report.total},
          {"errors_by_category", counts},
          {"node_precision", report.node_precision},
          {"node_recall", report.node_recall},
          {"arc_precision", report.arc_precision},
          {"arc_recall", report.arc_recall},
          {"alternative", report.alternative},
          {"detail", detail},
          {"metadata", {{"shared_arcs", "per_arc"}}}};
}

DiffReport report_from_json(const json& j) {
  auto bad = [](const std::string& what) { return Error(ErrorCode::Precondition, "malformed diff report: " + what); };
  if (!j.is_object()) throw bad("expected an object");
  DiffReport r;
  try {
    r.total = j.at("total").get<int>();
    for (auto c : kCategories) r.errors_by_category[c] = j.at("errors_by_category").at(std::string(to_string(c))).get<int>();
    r.node_precision = j.at("node_precision").get<double>();
    r.node_recall = j.at("node_recall").get<double>();
    r.arc_precision = j.at("arc_precision").get<double>();
    r.arc_recall = j.at("arc_recall").get<double>();
    r.alternative = j.value("alternative", std::size_t{0});
    for (const auto& d : j.at("detail")) {
      auto c = category_from_string(d.at("category").get<std::string>());
      if (!c) throw bad("unknown category " + d.at("category").dump());
      r.detail.push_back({*c, d.at("expected").get<std::string>(), d.at("found").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw bad(e.what());
  }
  return r;
}

std::string report_render(const DiffReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) return to_json(report).dump(2) + "\n";
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "category,count\n";
    for (auto c : kCategories) out << to_string(c) << "," << report.count(c) << "\n";
    return out.str();
  }
  out << "total: " << report.total << "\n";
  for (auto c : kCategories) out << to_string(c) << ": " << report.count(c) << "\n";
  out << std::fixed << std::setprecision(3);
  out << "nodes: precision " << report.node_precision << " recall " << report.node_recall << "\n";
  out << "arcs: precision " << report.arc_precision << " recall " << report.arc_recall << "\n";
  out << "alternative: " << report.alternative << "\n";
  for (const auto& d : report.detail)
    out << "- " << to_string(d.category) << ": expected '" << d.expected << "', found '" << d.found << "'\n";
  return out.str();
}

}  // namespace dfmforge::eval
