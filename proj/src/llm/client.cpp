#include "dfmforge/llm/client.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <istream>
#include <regex>
#include <sstream>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"
#include "dfmforge/core/hash.hpp"

namespace dfmforge::llm {

using nlohmann::json;

std::string exchange_key(const std::vector<Message>& messages) {
  json j = json::array();
  for (const auto& m : messages) j.push_back({m.role, m.text});
  return core::to_hex(core::fnv1a64(j.dump()));
}

// ---------------------------------------------------------------- HTTP

HttpChatClient::HttpChatClient(HttpClientOptions options) : options_(std::move(options)) {}

json HttpChatClient::request_body(const std::vector<Message>& messages, const ClientConfig& config) {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.text}});
  return {{"model", config.model}, {"temperature", config.temperature}, {"messages", msgs}};
}

std::string HttpChatClient::send(const std::vector<Message>& messages, const ClientConfig& config) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.endpoint, m, url))
    throw Error(ErrorCode::ClientError, "bad chat endpoint '" + options_.endpoint + "'", options_.endpoint);
  std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Client cli(m[1].str());
  cli.set_connection_timeout(options_.timeout_seconds);
  cli.set_read_timeout(options_.timeout_seconds);
  httplib::Headers headers;
  if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  auto res = cli.Post(path, headers, request_body(messages, config).dump(), "application/json");
  if (!res)
    throw Error(ErrorCode::ClientError, "chat endpoint unreachable: " + httplib::to_string(res.error()),
                options_.endpoint);
  if (res->status != 200)
    throw Error(ErrorCode::ClientError,
                "chat endpoint answered " + std::to_string(res->status) + ": " + res->body.substr(0, 300),
                std::to_string(res->status));
  try {
    auto body = json::parse(res->body);
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ClientError, std::string("malformed chat completion: ") + e.what(), options_.endpoint);
  }
}

// ---------------------------------------------------------------- scripted

ScriptedClient::ScriptedClient(std::vector<std::string> responses) : responses_(responses.begin(), responses.end()) {}

std::string ScriptedClient::send(const std::vector<Message>& messages, const ClientConfig& config) {
  std::lock_guard lock(mutex_);
  requests_.push_back(messages);
  configs_.push_back(config);
  if (responses_.empty()) throw Error(ErrorCode::ClientError, "scripted client has no answers left");
  auto out = std::move(responses_.front());
  responses_.pop_front();
  return out;
}

std::vector<std::vector<Message>> ScriptedClient::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::vector<ClientConfig> ScriptedClient::configs() const {
  std::lock_guard lock(mutex_);
  return configs_;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::string> load_script(const std::string& path) {
  auto j = core::parse_document(slurp(path));
  if (j.is_object() && j.contains("responses")) j = j["responses"];
  if (!j.is_array()) throw Error(ErrorCode::Precondition, "response script must be a list of strings", path);
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (!x.is_string()) throw Error(ErrorCode::Precondition, "response script must be a list of strings", path);
    out.push_back(x.get<std::string>());
  }
  return out;
}

// ---------------------------------------------------------------- record / replay

RecordingClient::RecordingClient(std::shared_ptr<ChatClient> inner, std::string path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

std::string RecordingClient::send(const std::vector<Message>& messages, const ClientConfig& config) {
  auto response = inner_->send(messages, config);
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.text}});
  json line = {{"key", exchange_key(messages)},
               {"model", config.model},
               {"temperature", config.temperature},
               {"messages", msgs},
               {"response", response}};
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out || !(out << line.dump() << "\n"))
    throw Error(ErrorCode::Io, "cannot append to recording '" + path_ + "'", path_);
  return response;
}

ReplayClient::ReplayClient(std::istream& recording) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(recording, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      std::vector<Message> msgs;
      for (const auto& m : j.at("messages")) msgs.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
      // The key is recomputed so a hand-edited recording cannot drift.
      answers_[exchange_key(msgs)].push_back(j.at("response").get<std::string>());
      ++count_;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Io, "recording line " + std::to_string(n) + ": " + e.what(), std::to_string(n));
    }
  }
}

std::shared_ptr<ReplayClient> ReplayClient::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read recording '" + path + "'", path);
  return std::make_shared<ReplayClient>(in);
}

std::string ReplayClient::send(const std::vector<Message>& messages, const ClientConfig&) {
  auto key = exchange_key(messages);
  std::lock_guard lock(mutex_);
  auto it = answers_.find(key);
  if (it == answers_.end() || it->second.empty())
    throw Error(ErrorCode::ReplayMiss, "no recorded answer for this conversation (key " + key + ")", key);
  auto out = it->second.front();
  if (it->second.size() > 1) it->second.pop_front();
  return out;
}

std::shared_ptr<ChatClient> make_client(const std::string& backend, const std::string& record_path) {
  std::shared_ptr<ChatClient> client;
  if (backend.rfind("replay:", 0) == 0) {
    client = ReplayClient::from_file(backend.substr(7));
  } else if (backend.rfind("script:", 0) == 0) {
    client = std::make_shared<ScriptedClient>(load_script(backend.substr(7)));
  } else if (backend.empty()) {
    client = std::make_shared<HttpChatClient>();
  } else if (backend.rfind("http://", 0) == 0 || backend.rfind("https://", 0) == 0) {
    HttpClientOptions opt;
    opt.endpoint = backend;
    client = std::make_shared<HttpChatClient>(opt);
  } else {
    throw Error(ErrorCode::Precondition, "unknown LLM backend '" + backend + "'", backend);
  }
  if (!record_path.empty()) client = std::make_shared<RecordingClient>(client, record_path);
  return client;
}

}  // namespace dfmforge::llm
