#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace dfmforge::llm {

struct Message {
  std::string role;  // system, user or assistant
  std::string text;

  friend bool operator==(const Message&, const Message&) = default;
};

struct ClientConfig {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
};

/// One chat-completion call. Implementations throw dfmforge::Error with
/// ClientError (transport, auth, malformed reply) or ReplayMiss.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string send(const std::vector<Message>& messages, const ClientConfig& config) = 0;
};

/// Replay lookup key: FNV-1a over the role/text sequence.
std::string exchange_key(const std::vector<Message>& messages);

struct HttpClientOptions {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "DFMFORGE_LLM_KEY";  // unset or empty: no Authorization header
  int timeout_seconds = 120;
};

/// Messages-array chat-completion endpoint over HTTP(S).
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpClientOptions options = {});
  std::string send(const std::vector<Message>& messages, const ClientConfig& config) override;

  /// Request body sent for `messages`.
  static nlohmann::json request_body(const std::vector<Message>& messages, const ClientConfig& config);

 private:
  HttpClientOptions options_;
};

/// Hands out canned answers in order and keeps every request it saw.
class ScriptedClient : public ChatClient {
 public:
  explicit ScriptedClient(std::vector<std::string> responses);
  std::string send(const std::vector<Message>& messages, const ClientConfig& config) override;

  std::vector<std::vector<Message>> requests() const;
  std::vector<ClientConfig> configs() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> responses_;
  std::vector<std::vector<Message>> requests_;
  std::vector<ClientConfig> configs_;
};

/// Reads a response script: a YAML/JSON list of strings, or an object with
/// a `responses` list.
std::vector<std::string> load_script(const std::string& path);

/// Wraps a client and appends one JSON line per exchange to `path`:
/// {"key", "model", "temperature", "messages": [{"role", "content"}], "response"}.
class RecordingClient : public ChatClient {
 public:
  RecordingClient(std::shared_ptr<ChatClient> inner, std::string path);
  std::string send(const std::vector<Message>& messages, const ClientConfig& config) override;

 private:
  std::shared_ptr<ChatClient> inner_;
  std::string path_;
  std::mutex mutex_;
};

/// Serves recorded answers by message key. Repeated keys are served in
/// recording order; the last one is reused afterwards.
class ReplayClient : public ChatClient {
 public:
  explicit ReplayClient(std::istream& recording);
  static std::shared_ptr<ReplayClient> from_file(const std::string& path);
  std::string send(const std::vector<Message>& messages, const ClientConfig& config) override;

  std::size_t size() const { return count_; }

 private:
  std::mutex mutex_;
  std::map<std::string, std::deque<std::string>> answers_;
  std::size_t count_ = 0;
};

/// Builds a client from a backend spec:
///   replay:<file>   script:<file>   http(s)://...   (empty: default HTTP endpoint)
/// and wraps it in a RecordingClient when `record_path` is set.
std::shared_ptr<ChatClient> make_client(const std::string& backend, const std::string& record_path = {});

}  // namespace dfmforge::llm
