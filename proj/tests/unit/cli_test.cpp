#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/eval/diff.hpp"
#include "dfmforge/service/cli.hpp"
#include "generators.hpp"
#include "mutations.hpp"

namespace dfmforge::service {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dfmforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& rel) { return testing::fixture_path(rel); }

std::string temp_file(const std::string& name, const std::string& content = {}) {
  auto dir = std::filesystem::temp_directory_path() / ("dfmforge_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto p = (dir / name).string();
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

const std::string kDataDir = testing::data_path("");

TEST(Cli, Validate) {
  EXPECT_EQ(cli({"validate", fx("truth/c2_purchases_a.yaml")}).code, 0);
  auto fake = cli({"validate", fx("invalid/fake_node.yaml")});
  EXPECT_EQ(fake.code, 1);
  EXPECT_NE(fake.out.find("FakeNode"), std::string::npos);
  EXPECT_NE(fake.out.find("'UnitPrice'"), std::string::npos);
  EXPECT_EQ(cli({"validate", "/nonexistent/schema.yaml"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST(Cli, Draft) {
  auto r = cli({"draft", fx("relational/c2_purchases.yaml"), "--fact", "PURCHASES"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, testing::read_file(fx("drafts/c2_purchases.yaml")));
  auto cyc = cli({"draft", fx("invalid/cyclic_relational.json"), "--fact", "SALES"});
  EXPECT_EQ(cyc.code, 1);
  EXPECT_NE(cyc.err.find("CyclicForeignKeys"), std::string::npos);
  auto m = cli({"draft", fx("relational/c2_purchases.yaml"), "--fact", "PURCHASES", "--measures", "quantity"});
  EXPECT_EQ(m.code, 0);
  EXPECT_EQ(core::parse_yaml(m.out).measures.size(), 1u);
}

TEST(Cli, DiffExitCodes) {
  auto a = fx("truth/c2_purchases_a.yaml");
  auto b = fx("truth/c2_purchases_b.yaml");
  EXPECT_EQ(cli({"diff", a, a}).code, 0);
  EXPECT_EQ(cli({"diff", b, a, b}).code, 0);
  EXPECT_EQ(cli({"diff", b, a}).code, 2);
  EXPECT_EQ(cli({"diff", a}).code, 2);  // no truth: usage error
  EXPECT_EQ(cli({"diff", a, "/nonexistent.yaml"}).code, 126);

  std::mt19937_64 rng(3);
  auto truth = core::parse_yaml(testing::read_file(a));
  for (int trial = 0; trial < 10; ++trial) {
    auto m = testing::inject_mutations(rng, truth, 3);
    ASSERT_TRUE(m.has_value());
    auto path = temp_file("mutant.yaml", core::serialize_yaml(m->schema));
    EXPECT_EQ(cli({"diff", path, a}).code, 3);
  }
}

TEST(Cli, DiffFormats) {
  auto cand = fx("llm/c2_basic_refined.yaml");
  auto a = fx("truth/c2_purchases_a.yaml");
  auto b = fx("truth/c2_purchases_b.yaml");
  auto report = eval::diff(core::parse_yaml(testing::read_file(cand)),
                           {{core::parse_yaml(testing::read_file(a)), core::parse_yaml(testing::read_file(b))}});
  auto json = cli({"diff", cand, a, b, "--format", "json"});
  EXPECT_EQ(json.code, report.total);
  EXPECT_EQ(eval::report_from_json(nlohmann::json::parse(json.out)), report);
  auto csv = cli({"diff", cand, a, b, "--format", "csv"});
  EXPECT_EQ(csv.out, eval::report_render(report, eval::ReportFormat::Csv));
  auto limit = cli({"diff", cand, a, b, "--exhaustive"});  // more than 12 nodes
  EXPECT_EQ(limit.code, 126);
  EXPECT_NE(limit.err.find("MatcherLimit"), std::string::npos);
}

TEST(Cli, RefineLlmReplay) {
  auto transcript = temp_file("c2.jsonl");
  auto steps = std::filesystem::path(temp_file("steps_marker")).parent_path() / "steps";
  std::filesystem::create_directories(steps);
  auto r = cli({"refine-llm", fx("drafts/c2_purchases.yaml"), "--backend", "replay:" + fx("llm/c2_improved.jsonl"),
                "--data-dir", kDataDir, "--session-id", "c2", "--optional-statement", "Not all regions have a state.",
                "--removal-statement", "StoreId is not interesting to me.", "--transcript", transcript, "--steps-dir",
                steps.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, testing::read_file(fx("llm/c2_improved_refined.yaml")));
  EXPECT_EQ(testing::read_file((steps / "step6_removal.yaml").string()), r.out);
  EXPECT_FALSE(testing::read_file(transcript).empty());

  auto basic = cli({"refine-llm", fx("drafts/c2_purchases.yaml"), "--backend", "replay:" + fx("llm/c2_basic.jsonl"),
                    "--data-dir", kDataDir, "--mode", "basic", "--session-id", "c2-basic", "--optional-statement",
                    "Not all regions have a state.", "--removal-statement", "StoreId is not interesting to me."});
  EXPECT_EQ(basic.code, 1);  // one step without a schema
  EXPECT_NE(basic.err.find("descriptive: extraction_failed"), std::string::npos);
  EXPECT_EQ(basic.out, testing::read_file(fx("llm/c2_basic_refined.yaml")));

  auto wrong = cli({"refine-llm", fx("drafts/c4_rentals.yaml"), "--backend", "replay:" + fx("llm/c2_improved.jsonl"),
                    "--data-dir", kDataDir});
  EXPECT_EQ(wrong.code, 1);
  EXPECT_NE(wrong.err.find("ReplayMiss"), std::string::npos);
}

TEST(Cli, FixContinuesSavedChat) {
  auto chat = temp_file("c4.jsonl");
  auto first = cli({"refine-llm", fx("drafts/c4_rentals.yaml"), "--backend", "replay:" + fx("llm/c4_fix.jsonl"),
                    "--data-dir", kDataDir, "--session-id", "c4", "--steps", "rename", "--transcript", chat});
  ASSERT_EQ(first.code, 0) << first.err;
  auto longer = temp_file("c4_after.jsonl");
  auto fix = cli({"fix", chat, "Merge ``drop-off date'' and ``pick-up date'' into a single ``date'' node.",
                  "--backend", "replay:" + fx("llm/c4_fix.jsonl"), "--data-dir", kDataDir, "--transcript", longer});
  EXPECT_EQ(fix.code, 0) << fix.err;
  EXPECT_EQ(fix.out, testing::read_file(fx("llm/c4_fixed.yaml")));
  auto before = testing::read_file(chat);
  auto after = testing::read_file(longer);
  EXPECT_EQ(std::count(after.begin(), after.end(), '\n'), std::count(before.begin(), before.end(), '\n') + 2);
  EXPECT_EQ(cli({"fix", chat, "Merge them.", "--backend", "replay:" + fx("llm/c4_fix.jsonl"), "--data-dir", kDataDir})
                .code,
            1);
  EXPECT_EQ(cli({"refine-llm", fx("drafts/c4_rentals.yaml"), "--steps", "dance", "--backend",
                 "replay:" + fx("llm/c4_fix.jsonl"), "--data-dir", kDataDir})
                .code,
            2);
}

TEST(Cli, ServeRejectsBadConfig) {
  EXPECT_EQ(cli({"serve", "--port", "0"}).code, 2);
  EXPECT_EQ(cli({"serve", "--static", "/nonexistent/ui", "--backend", "replay:" + fx("llm/c4_fix.jsonl"),
                 "--data-dir", kDataDir})
                .code,
            2);
}

}  // namespace
}  // namespace dfmforge::service
