#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfmforge/core/schema.hpp"
#include "dfmforge/llm/client.hpp"
#include "dfmforge/llm/prompts.hpp"

namespace dfmforge::llm {

/// One line of a transcript file.
struct TranscriptRecord {
  std::string session_id;
  int turn = 0;  // 0 for the instruction prompt and examples
  std::string role;
  std::string text;
  std::string model;
  double temperature = 0.0;
  std::string timestamp;

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

nlohmann::json to_json(const TranscriptRecord& record);
TranscriptRecord transcript_record_from_json(const nlohmann::json& json);
/// JSON lines, one record per line.
std::string to_jsonl(const std::vector<TranscriptRecord>& records);
std::vector<TranscriptRecord> transcript_from_jsonl(std::string_view text);

/// Returns an ISO-8601 UTC timestamp; swapped out in tests.
using Clock = std::function<std::string()>;
std::string utc_now();

struct Turn {
  std::string prompt_text;
  std::string response_text;
  std::optional<core::DfmSchema> extracted_schema;
  std::string failure;  // extraction failure message, empty on success
  std::string timestamp;
};

struct StepResult {
  std::optional<core::DfmSchema> schema;  // unset on ExtractionFailure
  std::string response;
  std::string failure;

  bool ok() const { return schema.has_value(); }
};

/// One chat per test case. The preamble (ROLE as system message, the
/// instruction prompt, then each example as a user/assistant pair) is sent
/// with every request, followed by the session's own history.
class ChatSession {
 public:
  ChatSession(std::string session_id, PromptBundle bundle, std::shared_ptr<ChatClient> client,
              ClientConfig config = {}, Clock clock = utc_now);

  /// Continues a chat saved with transcript(): turn-0 records become the
  /// preamble, later user/assistant pairs the history. Model and temperature
  /// come from the records unless `config` is given.
  static ChatSession resume(const std::vector<TranscriptRecord>& records, PromptBundle bundle,
                            std::shared_ptr<ChatClient> client, std::optional<ClientConfig> config = std::nullopt,
                            Clock clock = utc_now);

  /// Case prompt for `step` on `input`. Optional and Removal use
  /// `user_statement` as their task and need one (Precondition otherwise).
  /// Throws ClientError/ReplayMiss from the client; an answer without a
  /// schema is recorded and reported through StepResult::failure.
  StepResult run_step(const core::DfmSchema& input, Step step, const std::string& user_statement = {});

  /// Free-text follow-up in the same chat. Precondition: a prior turn.
  StepResult iterate_fix(const std::string& fix_text);

  /// Sends a prepared prompt as the next user turn.
  StepResult send(const std::string& prompt_text);

  const std::string& id() const { return id_; }
  const PromptBundle& bundle() const { return bundle_; }
  const ClientConfig& config() const { return config_; }
  const std::vector<Turn>& turns() const { return turns_; }
  /// Messages the next request would start with.
  std::vector<Message> history() const;
  std::vector<TranscriptRecord> transcript() const;

 private:
  std::string id_;
  PromptBundle bundle_;
  std::shared_ptr<ChatClient> client_;
  ClientConfig config_;
  Clock clock_;
  std::vector<Message> preamble_;
  std::string opened_at_;
  std::vector<Turn> turns_;
};

/// End-user statements for the two steps that need them; empty = skip.
struct Statements {
  std::string optional;
  std::string removal;
};

enum class StepStatus { Applied, Skipped, ExtractionFailed };
std::string_view to_string(StepStatus status);

struct StepSnapshot {
  Step step;
  StepStatus status;
  core::DfmSchema schema;  // schema after the step (the input again when not applied)
  std::string note;
};

struct PipelineResult {
  core::DfmSchema final_schema;
  std::vector<StepSnapshot> steps;
  std::vector<TranscriptRecord> transcript;
};

/// Runs the six steps in order inside `session`, feeding each output to the
/// next step. Steps without a statement are skipped; an extraction failure
/// keeps the previous schema and the pipeline goes on.
PipelineResult run_pipeline(ChatSession& session, const core::DfmSchema& draft, const Statements& statements);
/// Same, running only the steps listed in `selected` (still in pipeline order).
PipelineResult run_pipeline(ChatSession& session, const core::DfmSchema& draft, const Statements& statements,
                            const std::vector<Step>& selected);

PipelineResult run_pipeline(const core::DfmSchema& draft, const PromptBundle& bundle, const Statements& statements,
                            std::shared_ptr<ChatClient> client, const std::string& session_id = "session",
                            ClientConfig config = {}, Clock clock = utc_now);

}  // namespace dfmforge::llm
