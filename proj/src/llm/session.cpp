#include "dfmforge/llm/session.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <sstream>

#include "dfmforge/core/error.hpp"
#include "dfmforge/llm/extract.hpp"

namespace dfmforge::llm {

using nlohmann::json;

json to_json(const TranscriptRecord& r) {
  return {{"session_id", r.session_id}, {"turn", r.turn},           {"role", r.role},
          {"text", r.text},             {"model", r.model},         {"temperature", r.temperature},
          {"timestamp", r.timestamp}};
}

TranscriptRecord transcript_record_from_json(const json& j) {
  try {
    return {j.at("session_id").get<std::string>(), j.at("turn").get<int>(),
            j.at("role").get<std::string>(),       j.at("text").get<std::string>(),
            j.at("model").get<std::string>(),      j.at("temperature").get<double>(),
            j.at("timestamp").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed transcript record: ") + e.what());
  }
}

std::string to_jsonl(const std::vector<TranscriptRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

std::vector<TranscriptRecord> transcript_from_jsonl(std::string_view text) {
  std::vector<TranscriptRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(transcript_record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Io, std::string("malformed transcript line: ") + e.what());
    }
  }
  return out;
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ChatSession::ChatSession(std::string session_id, PromptBundle bundle, std::shared_ptr<ChatClient> client,
                         ClientConfig config, Clock clock)
    : id_(std::move(session_id)),
      bundle_(std::move(bundle)),
      client_(std::move(client)),
      config_(std::move(config)),
      clock_(clock ? std::move(clock) : Clock(utc_now)) {
  preamble_.push_back({"system", bundle_.role_text});
  preamble_.push_back({"user", instruction_text(bundle_)});
  for (const auto& ex : bundle_.examples) {
    auto [user, assistant] = example_turns(bundle_, ex);
    preamble_.push_back({"user", user});
    preamble_.push_back({"assistant", assistant});
  }
  opened_at_ = clock_();
}

ChatSession ChatSession::resume(const std::vector<TranscriptRecord>& records, PromptBundle bundle,
                                std::shared_ptr<ChatClient> client, std::optional<ClientConfig> config, Clock clock) {
  if (records.empty()) throw Error(ErrorCode::Precondition, "cannot resume an empty transcript");
  ClientConfig cfg = config.value_or(ClientConfig{records.front().model, records.front().temperature});
  ChatSession s(records.front().session_id, std::move(bundle), std::move(client), cfg, std::move(clock));
  s.preamble_.clear();
  s.opened_at_ = records.front().timestamp;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.session_id != s.id_)
      throw Error(ErrorCode::Precondition, "transcript mixes sessions '" + s.id_ + "' and '" + r.session_id + "'",
                  r.session_id);
    if (r.turn == 0) {
      s.preamble_.push_back({r.role, r.text});
      continue;
    }
    if (r.role != "user" || i + 1 >= records.size() || records[i + 1].role != "assistant" ||
        records[i + 1].turn != r.turn)
      throw Error(ErrorCode::Precondition, "turn " + std::to_string(r.turn) + " is not a user/assistant pair",
                  std::to_string(r.turn));
    const auto& answer = records[++i];
    Turn t{r.text, answer.text, std::nullopt, {}, r.timestamp};
    if (auto found = find_schema(answer.text))
      t.extracted_schema = found->schema;
    else
      t.failure = "no YAML schema with a fact tag in the answer";
    s.turns_.push_back(std::move(t));
  }
  return s;
}

std::vector<Message> ChatSession::history() const {
  auto out = preamble_;
  for (const auto& t : turns_) {
    out.push_back({"user", t.prompt_text});
    out.push_back({"assistant", t.response_text});
  }
  return out;
}

StepResult ChatSession::send(const std::string& prompt_text) {
  auto messages = history();
  messages.push_back({"user", prompt_text});
  auto response = client_->send(messages, config_);

  Turn turn{prompt_text, response, std::nullopt, {}, clock_()};
  StepResult result{std::nullopt, response, {}};
  try {
    auto found = extract_schema(response);
    turn.extracted_schema = found.schema;
    result.schema = std::move(found.schema);
  } catch (const Error& e) {
    turn.failure = e.what();
    result.failure = e.what();
  }
  turns_.push_back(std::move(turn));
  return result;
}

StepResult ChatSession::run_step(const core::DfmSchema& input, Step step, const std::string& user_statement) {
  std::string task;
  if (needs_statement(step)) {
    if (user_statement.find_first_not_of(" \t\r\n") == std::string::npos)
      throw Error(ErrorCode::Precondition, "step " + std::string(to_string(step)) + " needs an end-user statement",
                  std::string(to_string(step)));
    task = user_statement;
  } else {
    task = bundle_.step_tasks.count(step) ? bundle_.step_tasks.at(step) : "";
    if (!user_statement.empty()) task += (task.empty() ? "" : " ") + user_statement;
  }
  return send(render_case_prompt(bundle_, {input, task, true}));
}

StepResult ChatSession::iterate_fix(const std::string& fix_text) {
  if (turns_.empty()) throw Error(ErrorCode::Precondition, "a fix needs an earlier turn in the same session", id_);
  if (fix_text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw Error(ErrorCode::Precondition, "empty fix prompt", id_);
  return send(fix_text);
}

std::vector<TranscriptRecord> ChatSession::transcript() const {
  std::vector<TranscriptRecord> out;
  for (const auto& m : preamble_) out.push_back({id_, 0, m.role, m.text, config_.model, config_.temperature, opened_at_});
  for (std::size_t i = 0; i < turns_.size(); ++i) {
    const auto& t = turns_[i];
    int n = static_cast<int>(i) + 1;
    out.push_back({id_, n, "user", t.prompt_text, config_.model, config_.temperature, t.timestamp});
    out.push_back({id_, n, "assistant", t.response_text, config_.model, config_.temperature, t.timestamp});
  }
  return out;
}

std::string_view to_string(StepStatus status) {
  switch (status) {
    case StepStatus::Applied: return "applied";
    case StepStatus::Skipped: return "skipped";
    case StepStatus::ExtractionFailed: return "extraction_failed";
  }
  return "?";
}

PipelineResult run_pipeline(ChatSession& session, const core::DfmSchema& draft, const Statements& statements) {
  return run_pipeline(session, draft, statements, {kSteps.begin(), kSteps.end()});
}

PipelineResult run_pipeline(ChatSession& session, const core::DfmSchema& draft, const Statements& statements,
                            const std::vector<Step>& selected) {
  PipelineResult out;
  auto current = draft;
  for (auto step : kSteps) {
    if (std::find(selected.begin(), selected.end(), step) == selected.end()) {
      out.steps.push_back({step, StepStatus::Skipped, current, "not selected"});
      continue;
    }
    std::string statement;
    if (step == Step::Optional) statement = statements.optional;
    if (step == Step::Removal) statement = statements.removal;
    if (needs_statement(step) && statement.find_first_not_of(" \t\r\n") == std::string::npos) {
      out.steps.push_back({step, StepStatus::Skipped, current, "no end-user statement"});
      continue;
    }
    auto r = session.run_step(current, step, statement);
    if (r.ok()) {
      current = *r.schema;
      out.steps.push_back({step, StepStatus::Applied, current, {}});
    } else {
      out.steps.push_back({step, StepStatus::ExtractionFailed, current, r.failure});
    }
  }
  out.final_schema = current;
  out.transcript = session.transcript();
  return out;
}

PipelineResult run_pipeline(const core::DfmSchema& draft, const PromptBundle& bundle, const Statements& statements,
                            std::shared_ptr<ChatClient> client, const std::string& session_id, ClientConfig config,
                            Clock clock) {
  ChatSession session(session_id, bundle, std::move(client), std::move(config), std::move(clock));
  return run_pipeline(session, draft, statements);
}

}  // namespace dfmforge::llm
