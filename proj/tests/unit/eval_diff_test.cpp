#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"
#include "dfmforge/eval/diff.hpp"
#include "generators.hpp"
#include "mutations.hpp"

namespace dfmforge::eval {
namespace {

using core::DfmSchema;

DfmSchema load(const std::string& rel) { return core::parse_yaml(testing::read_file(testing::fixture_path(rel))); }

DfmSchema truth_a() { return load("truth/c2_purchases_a.yaml"); }
DfmSchema truth_b() { return load("truth/c2_purchases_b.yaml"); }

void replace_node(DfmSchema& s, const std::string& from, const std::string& to) {
  for (auto& d : s.dependencies) {
    if (d.from == from) d.from = to;
    if (d.to == from) d.to = to;
  }
  for (auto* marks : {&s.descriptive, &s.optional})
    for (auto& m : *marks)
      if (m == from) m = to;
}

int category_sum(const DiffReport& r) {
  int sum = 0;
  for (const auto& [c, n] : r.errors_by_category) sum += n;
  return sum;
}

TEST(Normalize, CaseInsensitiveAlnum) {
  EXPECT_EQ(normalize_name("Supplier Name", Normalization::CaseInsensitiveAlnum), "suppliername");
  EXPECT_EQ(normalize_name("SUPPLIER.name", Normalization::CaseInsensitiveAlnum), "suppliername");
  EXPECT_EQ(normalize_name("Supplier Name", Normalization::Exact), "Supplier Name");
}

TEST(MatchNodes, NormalizedNamesPair) {
  auto truth = truth_a();
  auto cand = truth;
  replace_node(cand, "SupplierName", "Supplier Name");
  auto m = match_nodes(cand, truth);
  EXPECT_EQ(m.at("Supplier Name"), "SupplierName");
  EXPECT_EQ(m.size(), truth.nodes().size());

  auto exact = match_nodes(cand, truth, {Normalization::Exact});
  EXPECT_FALSE(exact.count("Supplier Name"));
  auto r = diff(cand, {{truth}}, {Normalization::Exact});
  EXPECT_EQ(r.total, 2);
  EXPECT_EQ(r.count(Category::Removal), 2);

  auto loose = diff(cand, {{truth}});
  EXPECT_EQ(loose.total, 1);
  EXPECT_EQ(loose.count(Category::Renaming), 1);
  EXPECT_EQ(loose.detail.at(0), (Discrepancy{Category::Renaming, "SupplierName", "Supplier Name"}));
}

TEST(MatchNodes, SubstringPassNeedsUniquePartner) {
  auto truth = truth_a();
  auto cand = truth;
  replace_node(cand, "Category", "ProductCategory");
  EXPECT_EQ(match_nodes(cand, truth).at("ProductCategory"), "Category");

  // "Name" sits inside both ProductName and SupplierName.
  cand = truth;
  replace_node(cand, "ProductName", "Name");
  replace_node(cand, "SupplierName", "Sname");
  auto m = match_nodes(cand, truth);
  EXPECT_FALSE(m.count("Name"));
}

TEST(MatchNodes, FakeNodeStaysUnmatched) {
  auto truth = truth_a();
  auto cand = truth;
  for (auto& d : cand.dependencies)
    if (d.to == "UnitPrice (AVG)") d.to = "UnitPrice";
  auto m = match_nodes(cand, truth);
  EXPECT_FALSE(m.count("UnitPrice"));
  auto r = diff(cand, {{truth}});
  EXPECT_EQ(r.total, 2);
  EXPECT_EQ(r.count(Category::Structure), 2);
}

TEST(Diff, IdentityOnFixtures) {
  for (const auto* f : {"drafts/c1_installations.yaml", "drafts/c2_purchases.yaml", "drafts/c3_crossfit.yaml",
                        "drafts/c4_rentals.yaml", "drafts/c5_flights.yaml", "truth/c2_purchases_a.yaml",
                        "truth/c2_purchases_b.yaml"}) {
    auto s = load(f);
    auto r = diff(s, {{s}});
    EXPECT_EQ(r.total, 0) << f << report_render(r, ReportFormat::Text);
    EXPECT_EQ(r.node_precision, 1.0);
    EXPECT_EQ(r.node_recall, 1.0);
    EXPECT_EQ(r.arc_precision, 1.0);
    EXPECT_EQ(r.arc_recall, 1.0);
    EXPECT_TRUE(r.detail.empty());
  }
}

TEST(Diff, MissingOptionalMark) {
  auto cand = truth_a();
  cand.optional.clear();
  auto r = diff(cand, {{truth_a(), truth_b()}});
  EXPECT_EQ(r.total, 1);
  EXPECT_EQ(r.count(Category::Optional), 1);
  EXPECT_EQ(r.alternative, 0u);
  EXPECT_EQ(r.detail.at(0), (Discrepancy{Category::Optional, "State (optional)", "State"}));
}

TEST(Diff, ClosestAlternativeWins) {
  EXPECT_EQ(diff(truth_b(), {{truth_a()}}).total, 2);
  auto r = diff(truth_b(), {{truth_a(), truth_b()}});
  EXPECT_EQ(r.total, 0);
  EXPECT_EQ(r.alternative, 1u);
}

TEST(Diff, KeptAttributeThatShouldBeRemoved) {
  auto cand = truth_a();
  for (auto& d : cand.dependencies)
    if (d.from == "Purchases" && d.to == "City") d.to = "StoreId";
  cand.dependencies.push_back({"StoreId", "City", {}});
  cand.dependencies.push_back({"StoreId", "Manager", {}});
  cand.descriptive.push_back("Manager");
  auto r = diff(cand, {{truth_a()}});
  // StoreId and Manager survive, Purchases -> City is missing.
  EXPECT_EQ(r.count(Category::Removal), 2);
  EXPECT_EQ(r.count(Category::Structure), 1);
  EXPECT_EQ(r.total, 3);
}

TEST(Diff, MissingTimeLevels) {
  auto cand = truth_a();
  std::erase_if(cand.dependencies, [](const auto& d) { return d.to == "Month" || d.to == "Year"; });
  auto r = diff(cand, {{truth_a()}});
  EXPECT_EQ(r.count(Category::TimeHierarchy), 2);
  EXPECT_EQ(r.total, 2);
}

TEST(Diff, AdditivityAndMarks) {
  auto cand = truth_a();
  cand.measures[2].additivity = core::Additivity::Additive;
  replace_node(cand, "UnitPrice (AVG)", "UnitPrice");
  cand.descriptive = {"ProductName", "SupplierName"};
  auto r = diff(cand, {{truth_a(), truth_b()}});
  EXPECT_EQ(r.count(Category::Additivity), 1);
  EXPECT_EQ(r.count(Category::DescriptiveOrDiscretized), 1);
  EXPECT_EQ(r.total, 2);
}

TEST(Diff, RolesCountPerArc) {
  DfmSchema truth;
  truth.fact = "Rentals";
  truth.dependencies = {{"Rentals", "Date", "pickUp"}, {"Rentals", "Date", "dropOff"}, {"Date", "Month", {}}};
  auto cand = truth;
  cand.dependencies[0].role = "start";
  cand.dependencies[1].role = "end";
  auto r = diff(cand, {{truth}});
  EXPECT_EQ(r.count(Category::Structure), 2);
  EXPECT_EQ(r.arc_precision, 1.0);
  cand.dependencies[1].role = "dropOff";
  EXPECT_EQ(diff(cand, {{truth}}).total, 1);
}

TEST(Diff, PrecisionAndRecall) {
  auto cand = truth_a();
  cand.dependencies.push_back({"Product", "Color", {}});
  auto r = diff(cand, {{truth_a()}});
  EXPECT_EQ(r.total, 1);
  EXPECT_EQ(r.count(Category::Removal), 1);
  EXPECT_DOUBLE_EQ(r.node_precision, 16.0 / 17.0);
  EXPECT_DOUBLE_EQ(r.node_recall, 1.0);
  EXPECT_DOUBLE_EQ(r.arc_precision, 15.0 / 16.0);
  EXPECT_DOUBLE_EQ(r.arc_recall, 1.0);

  DfmSchema empty;
  auto e = diff(empty, {{truth_a()}});
  EXPECT_EQ(e.node_precision, 1.0);
  EXPECT_EQ(e.node_recall, 0.0);
  EXPECT_EQ(e.arc_precision, 1.0);
  EXPECT_EQ(e.arc_recall, 0.0);
  EXPECT_EQ(e.total, 16);
}

TEST(Diff, Errors) {
  EXPECT_THROW(diff(truth_a(), {}), Error);
  try {
    diff(truth_a(), {});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGroundTruth);
  }
  try {
    match_nodes_exhaustive(truth_a(), truth_a());
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MatcherLimit);
  }
  auto broken = truth_a();
  broken.dependencies.push_back({"Year", "Date", {}});
  try {
    check_ground_truth({{truth_a(), broken}});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Precondition);
    EXPECT_EQ(e.subject(), "1");
  }
  MatchConfig negative;
  negative.weights[0] = -1;
  EXPECT_THROW(diff(truth_a(), {{truth_a()}}, negative), Error);
}

TEST(Diff, WeightsScaleTheTotal) {
  auto cand = truth_a();
  cand.optional.clear();
  MatchConfig cfg;
  cfg.weights[static_cast<std::size_t>(Category::Optional)] = 3;
  auto r = diff(cand, {{truth_a()}}, cfg);
  EXPECT_EQ(r.count(Category::Optional), 1);
  EXPECT_EQ(r.total, 3);
}

TEST(Report, Formats) {
  auto s = truth_a();
  auto zero = diff(s, {{s}});
  auto text = report_render(zero, ReportFormat::Text);
  EXPECT_EQ(text.rfind("total: 0\n", 0), 0u);

  auto cand = truth_a();
  cand.optional.clear();
  cand.descriptive.clear();
  std::erase_if(cand.dependencies, [](const auto& d) { return d.to == "Month" || d.to == "Year"; });
  replace_node(cand, "Region", "RegionName");
  cand.measures[0].additivity = core::Additivity::SemiAdditive;
  replace_node(cand, "Quantity", "Quantity (SUM-AVG)");
  cand.dependencies.push_back({"RegionName", "Area", {}});
  auto r = diff(cand, {{truth_a()}});

  auto csv = report_render(r, ReportFormat::Csv);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "category,count");
  int sum = 0, rows = 0;
  while (std::getline(lines, line)) {
    sum += std::stoi(line.substr(line.find(',') + 1));
    ++rows;
  }
  EXPECT_EQ(rows, 7);
  EXPECT_EQ(sum, r.total);
  EXPECT_EQ(r.total, 9) << report_render(r, ReportFormat::Text);

  auto back = report_from_json(nlohmann::json::parse(report_render(r, ReportFormat::Json)));
  EXPECT_EQ(back, r);
  EXPECT_EQ(to_json(r)["metadata"]["shared_arcs"], "per_arc");
}

// Properties over random schemata and the mutation injector.

TEST(DiffProperty, IdentityAndBounds) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto a = testing::random_valid_schema(rng);
    auto b = testing::random_valid_schema(rng);
    EXPECT_EQ(diff(a, {{a}}).total, 0);
    auto r = diff(a, {{b}});
    EXPECT_EQ(r.total, category_sum(r));
    EXPECT_EQ(static_cast<std::size_t>(r.total), r.detail.size());
    for (double x : {r.node_precision, r.node_recall, r.arc_precision, r.arc_recall}) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(DiffProperty, MutationCalibration) {
  std::mt19937_64 rng(11);
  testing::SchemaGenOptions opt;
  opt.max_nodes = 14;
  int trials = 0, exact = 0;
  for (int k = 1; k <= 5; ++k) {
    for (int i = 0; i < 60; ++i) {
      auto truth = testing::random_valid_schema(rng, opt);
      auto m = testing::inject_mutations(rng, truth, k);
      if (!m) continue;
      ++trials;
      auto r = diff(m->schema, {{truth}});
      if (r.total == k) ++exact;
      EXPECT_EQ(r.total, k) << ::testing::PrintToString(m->log) << report_render(r, ReportFormat::Text);
    }
  }
  EXPECT_GT(trials, 250);
  EXPECT_EQ(exact, trials);
}

TEST(DiffProperty, OneMoreMutationNeverLowersTheTotal) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    auto truth = testing::random_valid_schema(rng);
    int k = static_cast<int>(rng() % 4) + 1;
    auto fork = rng;
    auto fewer = testing::inject_mutations(rng, truth, k);
    auto more = testing::inject_mutations(fork, truth, k + 1);
    if (!fewer || !more) continue;
    ASSERT_EQ(std::vector(more->log.begin(), more->log.begin() + k), fewer->log);
    EXPECT_GE(diff(more->schema, {{truth}}).total, diff(fewer->schema, {{truth}}).total);
  }
}

TEST(DiffProperty, AddingAnAlternativeNeverRaisesTheTotal) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    auto cand = testing::random_valid_schema(rng);
    GroundTruthSet truth{{testing::random_valid_schema(rng)}};
    auto before = diff(cand, truth).total;
    truth.alternatives.push_back(rng() % 2 ? cand : testing::random_valid_schema(rng));
    EXPECT_LE(diff(cand, truth).total, before);
  }
}

TEST(DiffProperty, GreedyAgreesWithExhaustive) {
  std::mt19937_64 rng(29);
  testing::SchemaGenOptions opt;
  opt.max_nodes = 12;
  int pairs = 0;
  while (pairs < 200) {
    auto truth = testing::random_valid_schema(rng, opt);
    auto m = testing::inject_mutations(rng, truth, static_cast<int>(rng() % 6));
    if (!m || m->schema.nodes().size() > 12) continue;
    ++pairs;
    auto greedy = diff(m->schema, {{truth}});
    auto exhaustive = diff_exhaustive(m->schema, {{truth}});
    EXPECT_EQ(greedy.total, exhaustive.total) << ::testing::PrintToString(m->log);
  }
}

TEST(DiffProperty, ExhaustiveNeverWorseOnUnrelatedPairs) {
  std::mt19937_64 rng(37);
  testing::SchemaGenOptions opt;
  opt.max_nodes = 9;
  for (int i = 0; i < 100; ++i) {
    auto a = testing::random_valid_schema(rng, opt);
    auto b = testing::random_valid_schema(rng, opt);
    EXPECT_LE(diff_exhaustive(a, {{b}}).total, diff(a, {{b}}).total);
  }
}

}  // namespace
}  // namespace dfmforge::eval
