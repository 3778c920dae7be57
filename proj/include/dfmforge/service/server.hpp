#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfmforge/core/error.hpp"
#include "dfmforge/core/schema.hpp"
#include "dfmforge/llm/client.hpp"
#include "dfmforge/llm/prompts.hpp"
#include "dfmforge/llm/session.hpp"

namespace httplib {
class Server;
}

namespace dfmforge::service {

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;                // UI assets; empty = none
  std::vector<std::string> cors_origins;  // "*" allows any origin
  std::string llm_backend;               // see llm::make_client
  std::string record_path;
  llm::PromptMode prompt_mode = llm::PromptMode::Improved;
  std::string data_dir;
  llm::ClientConfig client_config;
};

/// Checks port range and that the static directory exists (Precondition).
void check_serve_config(const ServeConfig& cfg);

/// In-memory schema store plus one chat session per schema id. Each public
/// method is what one endpoint does; the HTTP layer only translates.
class Workbench {
 public:
  Workbench(std::shared_ptr<llm::ChatClient> client, llm::PromptBundle bundle,
            llm::ClientConfig client_config = {}, llm::Clock clock = llm::utc_now);

  struct Snapshot {
    std::string id;
    int version = 0;
    core::DfmSchema schema;
  };

  /// New id when `id` is empty; an existing id gets a fresh version 1.
  Snapshot put(const core::DfmSchema& schema, std::string id = {});
  /// Throws NotFound.
  Snapshot get(const std::string& id) const;

  struct OpsOutcome {
    Snapshot snapshot;
    nlohmann::json log;
    std::optional<nlohmann::json> failure;  // {index, code, message}; nothing committed
  };
  /// Applies the whole list or nothing. Stale base_version throws Conflict.
  OpsOutcome apply_ops(const std::string& id, const nlohmann::json& ops, std::optional<int> base_version);

  struct ChatOutcome {
    std::string session_id;
    int turn = 0;
    llm::StepResult result;
  };
  ChatOutcome llm_step(const std::string& id, llm::Step step, const std::string& statement);
  ChatOutcome llm_fix(const std::string& id, const std::string& text);
  /// Commits the schema extracted in the session's last turn.
  Snapshot accept(const std::string& id, std::optional<int> base_version);

  std::vector<llm::TranscriptRecord> transcript(const std::string& session_id) const;

  /// Raised for unknown ids and stale versions.
  struct NotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
  };
  struct Conflict : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

 private:
  struct Entry {
    mutable std::mutex mutex;  // serializes ops, chats and reads on one id
    core::DfmSchema schema;
    int version = 1;
    std::unique_ptr<llm::ChatSession> session;
  };

  std::shared_ptr<Entry> entry(const std::string& id) const;
  llm::ChatSession& session_for(const std::string& id, Entry& e);

  std::shared_ptr<llm::ChatClient> client_;
  llm::PromptBundle bundle_;
  llm::ClientConfig client_config_;
  llm::Clock clock_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
  int next_id_ = 1;
};

/// Registers the JSON API (and static files, CORS) on `server`.
void mount(httplib::Server& server, Workbench& workbench, const ServeConfig& cfg);

/// Blocks serving until the process is stopped. Returns non-zero when the
/// port cannot be bound.
int serve(const ServeConfig& cfg);

}  // namespace dfmforge::service
