#include "dfmforge/llm/prompts.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"

#ifndef DFMFORGE_DEFAULT_DATA_DIR
#define DFMFORGE_DEFAULT_DATA_DIR "data"
#endif

namespace dfmforge::llm {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kStepNames = {"rename",   "additivity",     "descriptive",
                                                        "optional", "time_hierarchy", "removal"};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read prompt file '" + path + "'", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim_end(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string str_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw Error(ErrorCode::Precondition, where + ": missing '" + key + "'", where);
  return trim_end(j[key].get<std::string>());
}

Example load_example(const std::string& path) {
  auto j = core::parse_document(read_text(path));
  Example ex;
  ex.request = str_field(j, "request", path);
  ex.input_yaml = str_field(j, "input", path);
  ex.output_yaml = str_field(j, "output", path);
  if (j.contains("reasoning")) {
    for (const auto& s : j["reasoning"])
      ex.reasoning.push_back({str_field(s, "task", path), str_field(s, "explanation", path), str_field(s, "result", path)});
  }
  return ex;
}

// Single pass, so placeholder-like text inside values stays literal.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string fill_case(const PromptBundle& b, const std::string& schema_yaml, const std::string& task, bool yaml_only) {
  return trim_end(fill_template(
      b.case_template, {{"schema", trim_end(schema_yaml)}, {"task", task}, {"output", yaml_only ? b.output_text : ""}}));
}

}  // namespace

std::string_view to_string(Step step) { return kStepNames[static_cast<std::size_t>(step)]; }

std::optional<Step> step_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kStepNames.size(); ++i)
    if (kStepNames[i] == text) return kSteps[i];
  return std::nullopt;
}

bool needs_statement(Step step) { return step == Step::Optional || step == Step::Removal; }

std::string resolve_data_dir(const std::string& preferred) {
  if (!preferred.empty()) return preferred;
  if (const char* env = std::getenv("DFMFORGE_DATA_DIR"); env && *env) return env;
  return DFMFORGE_DEFAULT_DATA_DIR;
}

PromptBundle build_bundle(PromptMode mode, const BundleOverrides& overrides) {
  auto dir = resolve_data_dir(overrides.data_dir) + "/prompts/";
  PromptBundle b;
  b.role_text = overrides.role_text.value_or(trim_end(read_text(dir + "role.txt")));
  b.format_text = overrides.format_text.value_or(trim_end(read_text(dir + "format.txt")));
  b.task_text = overrides.task_text.value_or(trim_end(read_text(dir + "task.txt")));
  b.case_template = trim_end(read_text(dir + "case.txt"));
  b.output_text = trim_end(read_text(dir + "output.txt"));

  auto steps = core::parse_document(read_text(dir + "steps.yaml"));
  for (auto step : kSteps) {
    auto key = std::string(to_string(step));
    b.step_tasks[step] = steps.contains(key) && steps[key].is_string() ? steps[key].get<std::string>() : "";
  }
  for (const auto& [step, text] : overrides.step_tasks) b.step_tasks[step] = text;

  if (mode == PromptMode::Improved) {
    b.procedure_text = overrides.procedure_text.value_or(trim_end(read_text(dir + "procedure.txt")));
    b.examples.push_back(load_example(dir + "examples/example1.yaml"));
    b.examples.push_back(load_example(dir + "examples/example2.yaml"));
  } else if (overrides.procedure_text) {
    b.procedure_text = overrides.procedure_text;
  }
  check_bundle(b);
  return b;
}

void check_bundle(const PromptBundle& b) {
  auto require = [](const std::string& text, const char* what) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
      throw Error(ErrorCode::Precondition, std::string("prompt bundle: ") + what + " text is empty", what);
  };
  require(b.role_text, "role");
  require(b.format_text, "format");
  require(b.task_text, "task");
  auto parses = [](const std::string& yaml, const std::string& what) {
    try {
      core::parse_yaml(yaml);
    } catch (const Error& e) {
      throw Error(ErrorCode::Precondition, "prompt bundle: " + what + " does not parse: " + e.what(), what);
    }
  };
  for (std::size_t i = 0; i < b.examples.size(); ++i) {
    auto tag = "example " + std::to_string(i + 1);
    parses(b.examples[i].input_yaml, tag + " input");
    parses(b.examples[i].output_yaml, tag + " output");
    for (std::size_t k = 0; k < b.examples[i].reasoning.size(); ++k)
      parses(b.examples[i].reasoning[k].result_yaml, tag + " step " + std::to_string(k + 1));
  }
}

std::string render_case_prompt(const PromptBundle& bundle, const CasePrompt& prompt) {
  if (prompt.task_text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw Error(ErrorCode::Precondition, "case prompt without a task");
  return fill_case(bundle, core::serialize_yaml(prompt.input_schema), prompt.task_text, prompt.expect_yaml_only);
}

std::string instruction_text(const PromptBundle& bundle) {
  auto text = bundle.format_text + "\n\n" + bundle.task_text;
  if (bundle.procedure_text) text += "\n\n" + *bundle.procedure_text;
  return text;
}

std::pair<std::string, std::string> example_turns(const PromptBundle& bundle, const Example& example) {
  auto user = fill_case(bundle, example.input_yaml, example.request, true);
  std::string answer;
  for (std::size_t i = 0; i < example.reasoning.size(); ++i) {
    const auto& s = example.reasoning[i];
    answer += "Step " + std::to_string(i + 1) + ": " + s.task + "\n" + s.explanation + "\n```yaml\n" + s.result_yaml +
              "\n```\n\n";
  }
  if (!example.reasoning.empty()) answer += "Refined schema:\n";
  answer += "```yaml\n" + example.output_yaml + "\n```";
  return {user, answer};
}

}  // namespace dfmforge::llm
