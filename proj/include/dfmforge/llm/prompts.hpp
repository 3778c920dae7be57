#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::llm {

/// Refinement steps in the order they are run; discretization is folded
/// into Descriptive.
enum class Step { Rename, Additivity, Descriptive, Optional, TimeHierarchy, Removal };

inline constexpr std::array<Step, 6> kSteps = {Step::Rename,   Step::Additivity,    Step::Descriptive,
                                               Step::Optional, Step::TimeHierarchy, Step::Removal};

/// rename, additivity, descriptive, optional, time_hierarchy, removal
std::string_view to_string(Step step);
std::optional<Step> step_from_string(std::string_view text);

/// Optional and Removal take an end-user statement as their task.
bool needs_statement(Step step);

enum class PromptMode { Basic, Improved };

struct ExampleStep {
  std::string task;
  std::string explanation;
  std::string result_yaml;
};

struct Example {
  std::string request;  // task line of the example's case prompt
  std::string input_yaml;
  std::vector<ExampleStep> reasoning;  // empty for output-only examples
  std::string output_yaml;
};

struct PromptBundle {
  std::string role_text;
  std::string format_text;
  std::string task_text;
  std::optional<std::string> procedure_text;
  std::vector<Example> examples;

  std::map<Step, std::string> step_tasks;  // case-prompt task per step
  std::string case_template;               // {schema}, {task}, {output}
  std::string output_text;                 // "Return only the YAML ..."
};

struct BundleOverrides {
  std::string data_dir;  // empty: $DFMFORGE_DATA_DIR, then the build-time default
  std::optional<std::string> role_text;
  std::optional<std::string> format_text;
  std::optional<std::string> task_text;
  std::optional<std::string> procedure_text;
  std::map<Step, std::string> step_tasks;
};

/// Directory holding prompts/ (see BundleOverrides::data_dir).
std::string resolve_data_dir(const std::string& preferred = {});

/// Basic = ROLE, FORMAT, TASK. Improved adds the PROCEDURE text and the two
/// examples, the first with its reasoning steps. Texts are read from
/// <data>/prompts; overrides replace them verbatim. Throws Io for missing
/// files and Precondition when check_bundle fails.
PromptBundle build_bundle(PromptMode mode, const BundleOverrides& overrides = {});

/// role/format/task non-empty and every example schema parses.
void check_bundle(const PromptBundle& bundle);

struct CasePrompt {
  core::DfmSchema input_schema;
  std::string task_text;
  bool expect_yaml_only = true;
};

std::string render_case_prompt(const PromptBundle& bundle, const CasePrompt& prompt);

/// FORMAT, TASK and (if any) PROCEDURE joined by blank lines.
std::string instruction_text(const PromptBundle& bundle);

/// An example as a user request and an assistant answer.
std::pair<std::string, std::string> example_turns(const PromptBundle& bundle, const Example& example);

}  // namespace dfmforge::llm
