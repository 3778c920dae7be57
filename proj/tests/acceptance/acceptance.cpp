// One line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"
#include "dfmforge/core/validate.hpp"
#include "dfmforge/draft/relational.hpp"
#include "dfmforge/eval/diff.hpp"
#include "dfmforge/llm/client.hpp"
#include "dfmforge/llm/extract.hpp"
#include "dfmforge/llm/prompts.hpp"
#include "dfmforge/llm/session.hpp"
#include "dfmforge/refine/ops.hpp"
#include "generators.hpp"
#include "mutations.hpp"
#include "wrappers.hpp"

namespace {

using namespace dfmforge;
using core::DfmSchema;

struct Outcome {
  bool pass;
  std::string detail;
};

DfmSchema load(const std::string& rel) { return core::parse_yaml(testing::read_file(testing::fixture_path(rel))); }

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

// ---------------------------------------------------------------- 1

struct Shape {
  int dims, measures, attrs;
  bool shared;
  bool operator==(const Shape&) const = default;
};

Shape shape_of(const DfmSchema& s) {
  std::set<std::string> measures, dims, nodes;
  for (const auto& m : s.measures) measures.insert(m.rendered());
  std::map<std::string, int> in;
  for (const auto& d : s.dependencies) {
    nodes.insert(d.from);
    nodes.insert(d.to);
    if (d.from == s.fact && !measures.count(d.to)) dims.insert(d.to);
    ++in[d.to];
  }
  int attrs = 0;
  for (const auto& n : nodes)
    if (n != s.fact && !measures.count(n)) ++attrs;
  bool shared = false;
  for (const auto& [n, k] : in) shared = shared || k > 1;
  return {static_cast<int>(dims.size()), static_cast<int>(measures.size()), attrs, shared};
}

// Order-free content of a schema.
std::string content_key(const DfmSchema& s) {
  std::vector<std::string> arcs, measures;
  for (const auto& d : s.dependencies) arcs.push_back(d.from + "\x1f" + d.to + "\x1f" + d.role.value_or("\x1e"));
  for (const auto& m : s.measures) measures.push_back(m.rendered());
  std::sort(arcs.begin(), arcs.end());
  std::sort(measures.begin(), measures.end());
  std::set<std::string> desc(s.descriptive.begin(), s.descriptive.end()), opt(s.optional.begin(), s.optional.end());
  std::string key = s.fact + "\n";
  for (const auto* list : {&arcs, &measures}) {
    for (const auto& x : *list) key += x + "\x1d";
    key += "\n";
  }
  for (const auto* marks : {&desc, &opt}) {
    for (const auto& x : *marks) key += x + "\x1d";
    key += "\n";
  }
  return key;
}

Outcome codec_round_trip() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  int ok = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    testing::SchemaGenOptions opt;
    opt.max_nodes = 40;
    opt.exotic_names = i % 4 == 0;
    auto s = testing::random_valid_schema(rng, opt);
    auto text = core::serialize_yaml(s);
    ++total;
    auto back = core::parse_yaml(text);
    if (s.nodes().size() <= 40 && content_key(back) == content_key(s) && core::serialize_yaml(back) == text)
      ++ok;
  }
  const std::map<std::string, Shape> fixtures = {{"drafts/c1_installations.yaml", {3, 0, 10, false}},
                                                 {"drafts/c2_purchases.yaml", {3, 3, 12, false}},
                                                 {"drafts/c3_crossfit.yaml", {2, 3, 13, false}},
                                                 {"drafts/c4_rentals.yaml", {3, 4, 16, true}},
                                                 {"drafts/c5_flights.yaml", {5, 5, 34, true}}};
  int shaped = 0;
  for (const auto& [path, expected] : fixtures) {
    auto text = testing::read_file(testing::fixture_path(path));
    auto s = core::parse_yaml(text);
    ++total;
    if (core::serialize_yaml(s) == text && content_key(core::parse_yaml(core::serialize_yaml(s))) == content_key(s)) ++ok;
    if (shape_of(s) == expected) ++shaped;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d/%d identical, %d/5 fixtures shaped as C1..C5, %.2f s (limit 5 s)", ok, total,
                shaped, secs);
  return {ok == total && shaped == 5 && secs < 5.0, buf};
}

// ---------------------------------------------------------------- 2

refine::RefinementOp random_op(std::mt19937_64& rng, const DfmSchema& s, int& counter) {
  auto attrs = s.attributes();
  auto fresh = [&] { return "Fresh" + std::to_string(counter++); };
  core::SchemaGraph g(s);
  std::vector<std::string> leaves, usable;
  for (const auto& a : attrs) {
    if (g.out_degree(a) == 0) leaves.push_back(a);
    if (!s.is_descriptive(a)) usable.push_back(a);
  }
  switch (std::uniform_int_distribution<int>(0, 6)(rng)) {
    case 0: return refine::Rename{pick(rng, attrs), fresh()};
    case 1:
      if (s.measures.empty()) return refine::MarkOptional{pick(rng, attrs)};
      return refine::SetAdditivity{pick(rng, s.measures).name, static_cast<core::Additivity>(rng() % 3)};
    case 2: return refine::MarkDescriptive{pick(rng, leaves)};
    case 3:
      return refine::Discretize{pick(rng, attrs), fresh(),
                                rng() % 2 ? refine::DiscretizeMode::Insert : refine::DiscretizeMode::Replace};
    case 4: return refine::MarkOptional{pick(rng, attrs)};
    case 5:
      if (usable.empty()) return refine::MarkOptional{pick(rng, attrs)};
      return refine::CompleteTimeHierarchy{pick(rng, usable)};
    default: return refine::RemoveAttribute{pick(rng, attrs)};
  }
}

std::set<std::string> reachable(const DfmSchema& s) {
  std::set<std::string> seen{s.fact};
  std::vector<std::string> todo{s.fact};
  while (!todo.empty()) {
    auto n = todo.back();
    todo.pop_back();
    for (const auto& d : s.dependencies)
      if (d.from == n && seen.insert(d.to).second) todo.push_back(d.to);
  }
  return seen;
}

Outcome invariant_preservation() {
  std::mt19937_64 rng(2);
  int applied = 0, invalid = 0, refused = 0, removals = 0, lost = 0;
  int counter = 0;
  std::set<std::string> kinds;
  for (int i = 0; i < 500; ++i) {
    testing::SchemaGenOptions opt;
    opt.shared_probability = 0.3;
    auto s = testing::random_valid_schema(rng, opt);
    for (int step = 0; step < 4 && !s.attributes().empty(); ++step) {
      auto op = random_op(rng, s, counter);
      DfmSchema out;
      try {
        out = refine::apply_op(s, op);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NameCollision) ++invalid;  // preconditions hold by construction
        ++refused;
        continue;
      }
      ++applied;
      kinds.insert(std::string(refine::kind_name(op)));
      if (!core::validate(out).ok()) ++invalid;
      if (const auto* rm = std::get_if<refine::RemoveAttribute>(&op)) {
        ++removals;
        auto before = reachable(s);
        auto after = reachable(out);
        for (const auto& n : out.nodes())
          if (!out.is_descriptive(n) && before.count(n) != after.count(n)) ++lost;
        std::set<std::string> surviving;
        for (const auto& n : out.nodes()) surviving.insert(n);
        for (const auto& n : s.nodes())
          if (n != rm->attr && !s.is_descriptive(n) && !surviving.count(n)) ++lost;
      }
      s = std::move(out);
    }
  }
  std::ostringstream d;
  d << applied << " ops of " << kinds.size() << " kinds on 500 schemata (" << refused << " refused on name collisions), "
    << invalid << " invalid outputs; "
    << removals << " removals, " << lost << " reachability violations";
  return {invalid == 0 && lost == 0 && kinds.size() == 7 && removals > 0, d.str()};
}

// ---------------------------------------------------------------- 3

Outcome removal_rule() {
  DfmSchema s;
  s.fact = "F";
  s.dependencies = {{"F", "a", std::nullopt}, {"a", "b", std::nullopt}, {"b", "c1", std::nullopt}, {"b", "c2", std::nullopt}};
  s.descriptive = {"c2"};
  auto out = refine::remove_attribute(s, "b");
  std::set<std::pair<std::string, std::string>> arcs;
  for (const auto& d : out.dependencies) arcs.insert({d.from, d.to});
  std::set<std::pair<std::string, std::string>> want{{"F", "a"}, {"a", "c1"}};
  bool c2_gone = !out.has_node("c2") && out.descriptive.empty();
  std::ostringstream d;
  d << "arcs after removing b:";
  for (const auto& [f, t] : arcs) d << " " << f << "->" << t;
  d << "; c2 " << (c2_gone ? "deleted from graph and descriptive set" : "still present");
  return {arcs == want && c2_gone && core::validate(out).ok(), d.str()};
}

// ---------------------------------------------------------------- 4

std::size_t expected_node_count(const draft::RelationalSchema& rel, const std::string& fact) {
  std::map<std::string, const draft::Table*> by_name;
  for (const auto& t : rel.tables) by_name[t.name] = &t;
  auto non_fk = [](const draft::Table& t, bool skip_pk) {
    std::set<std::string> fk;
    for (const auto& f : t.foreign_keys) fk.insert(f.columns.begin(), f.columns.end());
    std::set<std::string> pk(t.primary_key.begin(), t.primary_key.end());
    std::size_t n = 0;
    for (const auto& c : t.columns)
      if (!fk.count(c.name) && !(skip_pk && pk.count(c.name))) ++n;
    return n;
  };
  std::size_t count = 1 + non_fk(*by_name.at(fact), false);
  std::set<std::string> seen{fact};
  std::vector<std::string> todo{fact};
  while (!todo.empty()) {
    auto t = todo.back();
    todo.pop_back();
    for (const auto& fk : by_name.at(t)->foreign_keys) {
      if (!seen.insert(fk.target_table).second) continue;
      todo.push_back(fk.target_table);
      count += 1 + non_fk(*by_name.at(fk.target_table), true);
    }
  }
  return count;
}

Outcome draft_derivation() {
  auto rel = draft::load_relational(testing::read_file(testing::fixture_path("relational/c2_purchases.yaml")));
  auto golden = testing::read_file(testing::fixture_path("drafts/c2_purchases.yaml"));
  bool same = core::serialize_yaml(draft::derive_draft(rel, {"PURCHASES", draft::MeasureRule::NumericNonKey, {}})) ==
              golden;
  std::mt19937_64 rng(4);
  int ok = 0, n = 300;
  for (int i = 0; i < n; ++i) {
    auto src = testing::random_relational(rng, 12);
    auto fact = src.tables.front().name;
    auto d = draft::derive_draft(src, {fact, draft::MeasureRule::NumericNonKey, {}});
    if (core::validate(d).ok() && d.nodes().size() == expected_node_count(src, fact)) ++ok;
  }
  std::ostringstream d;
  d << "purchases golden " << (same ? "byte-identical" : "DIFFERS") << "; " << ok << "/" << n
    << " random sources (<= 12 tables) valid with the node-count formula";
  return {same && ok == n, d.str()};
}

// ---------------------------------------------------------------- 5

Outcome diff_calibration() {
  std::vector<DfmSchema> fixtures;
  for (const char* p : {"drafts/c1_installations.yaml", "drafts/c2_purchases.yaml", "drafts/c3_crossfit.yaml",
                        "drafts/c4_rentals.yaml", "drafts/c5_flights.yaml", "truth/c2_purchases_a.yaml",
                        "truth/c2_purchases_b.yaml", "llm/c2_improved_refined.yaml", "llm/c4_fixed.yaml"})
    fixtures.push_back(load(p));
  int identity = 0;
  for (const auto& f : fixtures) identity += eval::diff(f, {{f}}).total == 0;

  std::mt19937_64 rng(5);
  std::ostringstream d;
  d << "identity " << identity << "/" << fixtures.size() << "; exact totals per k:";
  double worst = 1.0;
  for (int k = 1; k <= 5; ++k) {
    int trials = 0, exact = 0;
    while (trials < 300) {
      // Half of the truths are fixtures, half random schemata.
      DfmSchema truth = trials % 2 ? pick(rng, fixtures) : testing::random_valid_schema(rng);
      auto m = testing::inject_mutations(rng, truth, k);
      if (!m) continue;
      ++trials;
      exact += eval::diff(m->schema, {{truth}}).total == k;
    }
    double rate = exact / 300.0;
    worst = std::min(worst, rate);
    d << " k=" << k << " " << exact << "/300";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, " (worst %.1f%%, need >= 95%%)", worst * 100);
  d << buf;
  return {identity == static_cast<int>(fixtures.size()) && worst >= 0.95, d.str()};
}

// ---------------------------------------------------------------- 6

Outcome greedy_vs_exhaustive() {
  std::mt19937_64 rng(6);
  testing::SchemaGenOptions opt;
  opt.max_nodes = 12;
  int pairs = 0, equal = 0;
  while (pairs < 200) {
    auto truth = testing::random_valid_schema(rng, opt);
    auto m = testing::inject_mutations(rng, truth, static_cast<int>(rng() % 6));
    if (!m || m->schema.nodes().size() > 12 || truth.nodes().size() > 12) continue;
    ++pairs;
    equal += eval::diff(m->schema, {{truth}}).total == eval::diff_exhaustive(m->schema, {{truth}}).total;
  }
  return {equal == pairs, std::to_string(equal) + "/" + std::to_string(pairs) + " pairs with equal totals"};
}

// ---------------------------------------------------------------- 7

Outcome llm_determinism() {
  llm::BundleOverrides o;
  o.data_dir = testing::data_path("");
  auto bundle = llm::build_bundle(llm::PromptMode::Improved, o);
  auto golden = testing::read_file(testing::fixture_path("llm/c2_improved_refined.yaml"));
  auto draft = load("drafts/c2_purchases.yaml");
  int identical = 0;
  for (int run = 0; run < 2; ++run) {
    auto client = llm::ReplayClient::from_file(testing::fixture_path("llm/c2_improved.jsonl"));
    auto r = llm::run_pipeline(draft, bundle, {"Not all regions have a state.", "StoreId is not interesting to me."},
                               client, "c2");
    identical += core::serialize_yaml(r.final_schema) == golden;
  }
  std::mt19937_64 rng(7);
  int recovered = 0;
  for (int i = 0; i < 100; ++i) {
    auto s = testing::random_valid_schema(rng);
    auto yaml = core::serialize_yaml(s);
    auto found = llm::find_schema(testing::wrap_in_prose(rng, yaml));
    recovered += found && core::serialize_yaml(found->schema) == yaml;
  }
  std::ostringstream d;
  d << identical << "/2 replayed C2 pipelines byte-identical to golden; extraction recovered " << recovered
    << "/100 wrapped schemata";
  return {identical == 2 && recovered == 100, d.str()};
}

// ---------------------------------------------------------------- 8

Outcome prompt_fidelity() {
  llm::BundleOverrides o;
  o.data_dir = testing::data_path("");
  auto b = llm::build_bundle(llm::PromptMode::Basic, o);
  bool role = b.role_text.find("You are a data warehouse designer. I'm the end-user.") != std::string::npos;
  bool format = b.format_text.find("listed inside a ``dependencies'' tag") != std::string::npos;
  std::string d = std::string("ROLE ") + (role ? "matches" : "DIFFERS") + ", FORMAT " + (format ? "matches" : "DIFFERS");
  return {role && format, d};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"codec round-trip", codec_round_trip},
      {"invariant preservation", invariant_preservation},
      {"removal-rule conformance", removal_rule},
      {"draft derivation", draft_derivation},
      {"diff identity and mutation calibration", diff_calibration},
      {"greedy vs exhaustive matcher agreement", greedy_vs_exhaustive},
      {"LLM pipeline determinism and extraction fuzz", llm_determinism},
      {"prompt-text fidelity", prompt_fidelity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].first << ": " << r.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
