#include "dfmforge/service/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"
#include "dfmforge/core/render.hpp"
#include "dfmforge/core/validate.hpp"
#include "dfmforge/draft/relational.hpp"
#include "dfmforge/eval/diff.hpp"
#include "dfmforge/llm/client.hpp"
#include "dfmforge/llm/prompts.hpp"
#include "dfmforge/llm/session.hpp"
#include "dfmforge/refine/ops.hpp"
#include "dfmforge/service/server.hpp"

namespace dfmforge::service {

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write '" + path + "'", path);
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::YamlSyntax:
    case ErrorCode::MissingTag:
    case ErrorCode::UnknownTag:
    case ErrorCode::NonScalarName:
    case ErrorCode::EmptyName:
    case ErrorCode::RelationalSyntax:
    case ErrorCode::InvalidOp:
    case ErrorCode::Precondition:
      return true;
    default:
      return false;
  }
}

struct Options {
  std::string format = "yaml";
  bool strict = false;

  std::string input;
  std::string second;
  std::string fact_table;
  std::vector<std::string> measures;
  std::string log_path;
  std::string discretize_mode = "replace";
  std::string render_format;
  bool allow_roles = false;

  // diff
  std::vector<std::string> truths;
  std::string report_format = "text";
  bool exhaustive = false;
  bool exact_names = false;

  // refine-llm, fix, serve
  std::string mode = "improved";
  std::string backend;
  std::string record_path;
  std::string transcript_path;
  std::string session_id = "session";
  std::string model;
  double temperature = 0.0;
  bool temperature_set = false;
  std::string data_dir;
  std::string optional_statement;
  std::string removal_statement;
  std::vector<std::string> steps;
  std::string steps_dir;
  std::string fix_text;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::vector<std::string> cors;
};

// Exit code of `diff` when it cannot produce a report; totals own 0..125.
constexpr int kExitDiffError = 126;

core::DfmSchema load_schema(const Options& o, const std::string& path) {
  return core::parse_yaml(read_input(path), {.strict = o.strict});
}

std::string emit(const Options& o, const core::DfmSchema& s) {
  return o.format == "json" ? core::to_json(s).dump(2) + "\n" : core::serialize_yaml(s);
}

int cmd_parse(const Options& o, std::ostream& out) {
  out << emit(o, load_schema(o, o.input));
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  auto report = core::validate(load_schema(o, o.input), {.allow_roles_outside_shared = o.allow_roles});
  if (o.format == "json")
    out << core::to_json(report).dump(2) << "\n";
  else
    out << core::to_text(report);
  return report.ok() ? kExitOk : kExitFindings;
}

int cmd_draft(const Options& o, std::ostream& out) {
  auto rel = draft::load_relational(read_input(o.input));
  draft::DraftConfig config{o.fact_table, draft::MeasureRule::NumericNonKey, {}};
  if (!o.measures.empty()) {
    config.measure_rule = draft::MeasureRule::ExplicitList;
    config.measures = o.measures;
  }
  out << emit(o, draft::derive_draft(rel, config));
  return kExitOk;
}

int cmd_apply(const Options& o, std::ostream& out, std::ostream& err) {
  auto schema = load_schema(o, o.input);
  auto mode = o.discretize_mode == "insert" ? refine::DiscretizeMode::Insert : refine::DiscretizeMode::Replace;
  auto ops = refine::ops_from_json(core::parse_document(read_input(o.second)), mode);
  auto result = refine::apply_ops(schema, ops);
  if (!o.log_path.empty()) write_output(o.log_path, refine::to_json(result.log).dump(2) + "\n");
  out << emit(o, result.schema);
  if (result.failure) {
    const auto& f = *result.failure;
    err << "op " << f.index << " (" << refine::kind_name(ops[f.index]) << "): " << to_string(f.code) << ": "
        << f.message << "\n";
    return kExitFindings;
  }
  return kExitOk;
}

int cmd_render(const Options& o, std::ostream& out) {
  auto schema = load_schema(o, o.input);
  auto format = o.render_format.empty() ? o.format : o.render_format;
  if (format == "dot")
    out << core::to_dot(schema);
  else if (format == "text")
    out << core::to_tree_text(schema);
  else if (format == "json")
    out << core::to_json(schema).dump(2) << "\n";
  else
    out << core::serialize_yaml(schema);
  return kExitOk;
}

int cmd_diff(const Options& o, std::ostream& out, std::ostream& err) {
  try {
    auto candidate = load_schema(o, o.input);
    eval::GroundTruthSet truth;
    for (const auto& t : o.truths) truth.alternatives.push_back(load_schema(o, t));
    eval::MatchConfig cfg;
    if (o.exact_names) cfg.name_normalization = eval::Normalization::Exact;
    auto report = o.exhaustive ? eval::diff_exhaustive(candidate, truth, cfg) : eval::diff(candidate, truth, cfg);
    auto format = o.report_format == "json" ? eval::ReportFormat::Json
                  : o.report_format == "csv" ? eval::ReportFormat::Csv
                                             : eval::ReportFormat::Text;
    out << eval::report_render(report, format);
    return std::min(report.total, 125);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitDiffError;
  }
}

llm::PromptBundle bundle_for(const Options& o) {
  llm::BundleOverrides overrides;
  overrides.data_dir = o.data_dir;
  return llm::build_bundle(o.mode == "basic" ? llm::PromptMode::Basic : llm::PromptMode::Improved, overrides);
}

llm::ClientConfig client_config(const Options& o) {
  llm::ClientConfig cfg;
  if (!o.model.empty()) cfg.model = o.model;
  if (o.temperature_set) cfg.temperature = o.temperature;
  return cfg;
}

std::vector<llm::Step> selected_steps(const Options& o) {
  if (o.steps.empty()) return {llm::kSteps.begin(), llm::kSteps.end()};
  std::vector<llm::Step> out;
  for (const auto& name : o.steps) {
    auto step = llm::step_from_string(name);
    if (!step) throw Error(ErrorCode::InvalidOp, "unknown step '" + name + "'", name);
    out.push_back(*step);
  }
  return out;
}

int cmd_refine_llm(const Options& o, std::ostream& out, std::ostream& err) {
  auto draft = load_schema(o, o.input);
  auto bundle = bundle_for(o);
  auto client = llm::make_client(o.backend, o.record_path);
  llm::ChatSession session(o.session_id, bundle, client, client_config(o));
  auto result = llm::run_pipeline(session, draft, {o.optional_statement, o.removal_statement}, selected_steps(o));

  bool failed = false;
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const auto& s = result.steps[i];
    err << "step " << i + 1 << " " << llm::to_string(s.step) << ": " << llm::to_string(s.status);
    if (!s.note.empty()) err << " (" << s.note << ")";
    err << "\n";
    failed = failed || s.status == llm::StepStatus::ExtractionFailed;
    if (!o.steps_dir.empty())
      write_output(o.steps_dir + "/step" + std::to_string(i + 1) + "_" + std::string(llm::to_string(s.step)) + ".yaml",
                   core::serialize_yaml(s.schema));
  }
  if (!o.transcript_path.empty()) write_output(o.transcript_path, llm::to_jsonl(result.transcript));
  out << emit(o, result.final_schema);
  return failed ? kExitFindings : kExitOk;
}

int cmd_fix(const Options& o, std::ostream& out, std::ostream& err) {
  auto records = llm::transcript_from_jsonl(read_input(o.input));
  auto client = llm::make_client(o.backend, o.record_path);
  std::optional<llm::ClientConfig> cfg;
  if (!o.model.empty() || o.temperature_set) {
    cfg = client_config(o);
    if (o.model.empty() && !records.empty()) cfg->model = records.front().model;
  }
  auto session = llm::ChatSession::resume(records, bundle_for(o), client, cfg);
  auto result = session.iterate_fix(o.fix_text);
  if (!o.transcript_path.empty()) write_output(o.transcript_path, llm::to_jsonl(session.transcript()));
  if (!result.ok()) {
    err << "error: ExtractionFailure: " << result.failure << "\n" << result.response << "\n";
    return kExitFindings;
  }
  out << emit(o, *result.schema);
  return kExitOk;
}

int cmd_serve(const Options& o) {
  ServeConfig cfg;
  cfg.host = o.host;
  cfg.port = o.port;
  cfg.static_dir = o.static_dir;
  cfg.cors_origins = o.cors;
  cfg.llm_backend = o.backend;
  cfg.record_path = o.record_path;
  cfg.prompt_mode = o.mode == "basic" ? llm::PromptMode::Basic : llm::PromptMode::Improved;
  cfg.data_dir = o.data_dir;
  cfg.client_config = client_config(o);
  return serve(cfg);
}

void add_llm_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--mode", o.mode, "Prompt bundle: basic or improved")->check(CLI::IsMember({"basic", "improved"}));
  cmd->add_option("--backend", o.backend, "replay:<file>, script:<file> or an http(s) chat endpoint");
  cmd->add_option("--record", o.record_path, "Append every exchange to this JSONL recording");
  cmd->add_option("--model", o.model, "Model name sent to the backend");
  cmd->add_option("--temperature", o.temperature, "Sampling temperature (default 0)");
  cmd->add_option("--data-dir", o.data_dir, "Directory holding prompts/ (default: DFMFORGE_DATA_DIR or built-in)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Draft, refine and score Dimensional Fact Model schemata", "dfmforge"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read default flag values from a TOML/INI file");
  Options o;
  app.add_option("--format", o.format, "Output format for schemata and reports")
      ->check(CLI::IsMember({"yaml", "json"}));
  app.add_flag("--strict", o.strict, "Reject YAML tags outside the dialect");

  auto* parse = app.add_subcommand("parse", "Read a schema and print it in canonical form");
  parse->add_option("schema", o.input, "Schema file (YAML or JSON, - for stdin)")->required();

  auto* validate = app.add_subcommand("validate", "Check structural invariants; exit 1 on violations");
  validate->add_option("schema", o.input, "Schema file")->required();
  validate->add_flag("--allow-roles", o.allow_roles, "Accept roles on arcs into non-shared nodes");

  auto* draft = app.add_subcommand("draft", "Derive a draft schema from a relational source");
  draft->add_option("relational", o.input, "Relational schema file (JSON or YAML)")->required();
  draft->add_option("--fact", o.fact_table, "Fact table")->required();
  draft->add_option("--measures", o.measures, "Fact columns to use as measures")->delimiter(',');

  auto* apply = app.add_subcommand("apply", "Apply a refinement op script to a schema");
  apply->add_option("schema", o.input, "Schema file")->required();
  apply->add_option("ops", o.second, "Op list (JSON or YAML)")->required();
  apply->add_option("--log", o.log_path, "Write the refinement log here");
  apply->add_option("--discretize-mode", o.discretize_mode, "Default for discretize ops without a mode")
      ->check(CLI::IsMember({"replace", "insert"}));

  auto* render = app.add_subcommand("render", "Render a schema as YAML, JSON, Graphviz DOT or a text tree");
  render->add_option("schema", o.input, "Schema file")->required();
  render->add_option("--format", o.render_format, "yaml, json, dot or text")
      ->check(CLI::IsMember({"yaml", "json", "dot", "text"}));

  auto* diff = app.add_subcommand("diff", "Count errors of a candidate against one or more ground truths");
  diff->add_option("candidate", o.input, "Candidate schema")->required();
  diff->add_option("truths", o.truths, "Ground-truth alternatives (the best match counts)")->required();
  diff->add_option("--format", o.report_format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  diff->add_flag("--exhaustive", o.exhaustive, "Exhaustive node matching (at most 12 nodes)");
  diff->add_flag("--exact-names", o.exact_names, "Match names exactly instead of case/punctuation-insensitively");

  auto* refine_llm = app.add_subcommand("refine-llm", "Run the six LLM refinement steps on a draft");
  refine_llm->add_option("draft", o.input, "Draft schema")->required();
  add_llm_flags(refine_llm, o);
  refine_llm->add_option("--optional-statement", o.optional_statement, "End-user statement for the optional step");
  refine_llm->add_option("--removal-statement", o.removal_statement, "End-user statement for the removal step");
  refine_llm->add_option("--steps", o.steps, "Run only these steps")->delimiter(',');
  refine_llm->add_option("--steps-dir", o.steps_dir, "Write the schema after each step into this directory");
  refine_llm->add_option("--transcript", o.transcript_path, "Write the chat transcript (JSONL) here");
  refine_llm->add_option("--session-id", o.session_id, "Session id used in the transcript");

  auto* fix = app.add_subcommand("fix", "Send a follow-up prompt in a saved chat");
  fix->add_option("chat", o.input, "Transcript written by refine-llm or fix")->required();
  fix->add_option("text", o.fix_text, "Fix prompt, sent verbatim")->required();
  add_llm_flags(fix, o);
  fix->add_option("--transcript", o.transcript_path, "Write the extended transcript here");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON service");
  add_llm_flags(serve_cmd, o);
  serve_cmd->add_option("--host", o.host, "Bind address");
  serve_cmd->add_option("--port", o.port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--static", o.static_dir, "Directory of UI assets served at /");
  serve_cmd->add_option("--cors", o.cors, "Allowed origins (* for any)")->delimiter(',');

  try {
    app.parse(argc, argv);
    for (auto* cmd : {refine_llm, fix, serve_cmd})
      if (cmd->count("--temperature")) o.temperature_set = true;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*parse) return cmd_parse(o, out);
    if (*validate) return cmd_validate(o, out);
    if (*draft) return cmd_draft(o, out);
    if (*apply) return cmd_apply(o, out, err);
    if (*render) return cmd_render(o, out);
    if (*diff) return cmd_diff(o, out, err);
    if (*refine_llm) return cmd_refine_llm(o, out, err);
    if (*fix) return cmd_fix(o, out, err);
    if (*serve_cmd) return cmd_serve(o);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitUsage : kExitFindings;
  }
  return kExitUsage;
}

}  // namespace dfmforge::service
