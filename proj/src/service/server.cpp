#include "dfmforge/service/server.hpp"

#include <httplib.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"
#include "dfmforge/core/validate.hpp"
#include "dfmforge/eval/diff.hpp"
#include "dfmforge/refine/ops.hpp"

namespace dfmforge::service {

using nlohmann::json;

void check_serve_config(const ServeConfig& cfg) {
  if (cfg.port < 1 || cfg.port > 65535)
    throw Error(ErrorCode::Precondition, "port must be in [1, 65535]", std::to_string(cfg.port));
  if (!cfg.static_dir.empty() && !std::filesystem::is_directory(cfg.static_dir))
    throw Error(ErrorCode::Io, "static directory '" + cfg.static_dir + "' does not exist", cfg.static_dir);
}

// ---------------------------------------------------------------- workbench

Workbench::Workbench(std::shared_ptr<llm::ChatClient> client, llm::PromptBundle bundle, llm::ClientConfig client_config,
                     llm::Clock clock)
    : client_(std::move(client)),
      bundle_(std::move(bundle)),
      client_config_(std::move(client_config)),
      clock_(std::move(clock)) {}

std::shared_ptr<Workbench::Entry> Workbench::entry(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFound("unknown schema id '" + id + "'");
  return it->second;
}

Workbench::Snapshot Workbench::put(const core::DfmSchema& schema, std::string id) {
  auto e = std::make_shared<Entry>();
  e->schema = schema;
  std::unique_lock lock(map_mutex_);
  if (id.empty()) {
    do id = "s" + std::to_string(next_id_++);
    while (entries_.count(id));
  }
  entries_[id] = e;
  return {id, e->version, e->schema};
}

Workbench::Snapshot Workbench::get(const std::string& id) const {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  return {id, e->version, e->schema};
}

namespace {

void check_version(int current, std::optional<int> base) {
  if (base && *base != current)
    throw Workbench::Conflict("base_version " + std::to_string(*base) + " is stale, current version is " +
                              std::to_string(current));
}

}  // namespace

Workbench::OpsOutcome Workbench::apply_ops(const std::string& id, const json& ops_json, std::optional<int> base_version) {
  auto e = entry(id);
  auto ops = refine::ops_from_json(ops_json);
  std::lock_guard lock(e->mutex);
  check_version(e->version, base_version);
  auto result = refine::apply_ops(e->schema, ops);
  OpsOutcome out{{id, e->version, e->schema}, refine::to_json(result.log), std::nullopt};
  if (result.failure) {
    const auto& f = *result.failure;
    out.failure = json{{"index", f.index}, {"code", std::string(to_string(f.code))}, {"message", f.message}};
    return out;
  }
  if (!ops.empty()) {
    e->schema = result.schema;
    ++e->version;
  }
  out.snapshot = {id, e->version, e->schema};
  return out;
}

llm::ChatSession& Workbench::session_for(const std::string& id, Entry& e) {
  if (!e.session) e.session = std::make_unique<llm::ChatSession>(id, bundle_, client_, client_config_, clock_);
  return *e.session;
}

Workbench::ChatOutcome Workbench::llm_step(const std::string& id, llm::Step step, const std::string& statement) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  auto& session = session_for(id, *e);
  auto result = session.run_step(e->schema, step, statement);
  return {id, static_cast<int>(session.turns().size()), std::move(result)};
}

Workbench::ChatOutcome Workbench::llm_fix(const std::string& id, const std::string& text) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  auto& session = session_for(id, *e);
  auto result = session.iterate_fix(text);
  return {id, static_cast<int>(session.turns().size()), std::move(result)};
}

Workbench::Snapshot Workbench::accept(const std::string& id, std::optional<int> base_version) {
  auto e = entry(id);
  std::lock_guard lock(e->mutex);
  check_version(e->version, base_version);
  if (!e->session || e->session->turns().empty())
    throw Error(ErrorCode::Precondition, "nothing to accept: no chat turn yet", id);
  const auto& last = e->session->turns().back();
  if (!last.extracted_schema)
    throw Error(ErrorCode::Precondition, "nothing to accept: the last answer had no schema", id);
  e->schema = *last.extracted_schema;
  ++e->version;
  return {id, e->version, e->schema};
}

std::vector<llm::TranscriptRecord> Workbench::transcript(const std::string& session_id) const {
  auto e = entry(session_id);
  std::lock_guard lock(e->mutex);
  if (!e->session) return {};
  return e->session->transcript();
}

// ---------------------------------------------------------------- HTTP

namespace {

json snapshot_json(const Workbench::Snapshot& s) {
  return {{"id", s.id},
          {"version", s.version},
          {"schema", core::to_json(s.schema)},
          {"yaml", core::serialize_yaml(s.schema)},
          {"validation", core::to_json(core::validate(s.schema))}};
}

json error_json(std::string_view code, const std::string& message, const std::string& subject = {}) {
  json e{{"code", code}, {"message", message}};
  if (!subject.empty()) e["subject"] = subject;
  return {{"error", e}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ClientError:
    case ErrorCode::ReplayMiss:
    case ErrorCode::ExtractionFailure:
      return 502;
    default:
      return 400;
  }
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Precondition, std::string("request body is not JSON: ") + e.what());
  }
}

std::optional<int> base_version_of(const json& body) {
  if (!body.contains("base_version") || body["base_version"].is_null()) return std::nullopt;
  if (!body["base_version"].is_number_integer()) throw Error(ErrorCode::Precondition, "base_version must be an integer");
  return body["base_version"].get<int>();
}

std::string string_of(const json& body, const char* key) {
  if (!body.contains(key)) return {};
  if (!body[key].is_string()) throw Error(ErrorCode::Precondition, std::string("'") + key + "' must be a string", key);
  return body[key].get<std::string>();
}

json chat_json(const Workbench::ChatOutcome& o) {
  json j{{"session_id", o.session_id}, {"turn", o.turn}, {"response", o.result.response}};
  if (o.result.schema) {
    j["schema"] = core::to_json(*o.result.schema);
    j["yaml"] = core::serialize_yaml(*o.result.schema);
    j["validation"] = core::to_json(core::validate(*o.result.schema));
  }
  return j;
}

// An answer without a schema is an LLM-side failure: 502, raw text included.
void send_chat(httplib::Response& res, const Workbench::ChatOutcome& o) {
  if (o.result.ok()) return send_json(res, 200, chat_json(o));
  auto body = chat_json(o);
  body.update(error_json(to_string(ErrorCode::ExtractionFailure), o.result.failure, o.session_id));
  send_json(res, 502, body);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const Workbench::NotFound& e) {
      send_json(res, 404, error_json("NotFound", e.what()));
    } catch (const Workbench::Conflict& e) {
      send_json(res, 409, error_json("VersionConflict", e.what()));
    } catch (const Error& e) {
      send_json(res, status_for(e.code()), error_json(to_string(e.code()), e.what(), e.subject()));
    } catch (const std::exception& e) {
      send_json(res, 500, error_json("Internal", e.what()));
    }
  };
}

std::vector<std::string> split_ids(const httplib::Request& req, const char* key) {
  std::vector<std::string> out;
  auto n = req.get_param_value_count(key);
  for (std::size_t i = 0; i < n; ++i) {
    std::stringstream ss(req.get_param_value(key, i));
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

void mount(httplib::Server& server, Workbench& wb, const ServeConfig& cfg) {
  auto origins = cfg.cors_origins;
  server.set_post_routing_handler([origins](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_header("Origin")) return;
    auto origin = req.get_header_value("Origin");
    for (const auto& o : origins) {
      if (o == "*" || o == origin) {
        res.set_header("Access-Control-Allow-Origin", o == "*" ? "*" : origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        return;
      }
    }
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/api/schema", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
                auto body = body_of(req);
                core::DfmSchema schema;
                if (body.contains("yaml"))
                  schema = core::parse_yaml(string_of(body, "yaml"));
                else if (body.contains("schema"))
                  schema = core::from_json(body["schema"]);
                else
                  throw Error(ErrorCode::Precondition, "body needs 'yaml' or 'schema'");
                send_json(res, 201, snapshot_json(wb.put(schema, string_of(body, "id"))));
              }));

  server.Get(R"(/api/schema/([^/]+))", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, snapshot_json(wb.get(req.matches[1])));
             }));

  server.Post(R"(/api/schema/([^/]+)/ops)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
                auto body = body_of(req);
                json ops = body.is_array() ? body : body.value("ops", json::array());
                auto base = body.is_array() ? std::nullopt : base_version_of(body);
                auto out = wb.apply_ops(req.matches[1], ops, base);
                if (out.failure) {
                  json err = error_json((*out.failure)["code"].get<std::string>(),
                                        (*out.failure)["message"].get<std::string>());
                  err["error"]["index"] = (*out.failure)["index"];
                  err["version"] = out.snapshot.version;
                  return send_json(res, 400, err);
                }
                auto j = snapshot_json(out.snapshot);
                j["log"] = out.log;
                send_json(res, 200, j);
              }));

  server.Post(R"(/api/schema/([^/]+)/llm/step)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
                auto body = body_of(req);
                auto name = string_of(body, "step");
                auto step = llm::step_from_string(name);
                if (!step) throw Error(ErrorCode::Precondition, "unknown step '" + name + "'", name);
                send_chat(res, wb.llm_step(req.matches[1], *step, string_of(body, "statement")));
              }));

  server.Post(R"(/api/schema/([^/]+)/llm/fix)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
                auto body = body_of(req);
                send_chat(res, wb.llm_fix(req.matches[1], string_of(body, "text")));
              }));

  server.Post(R"(/api/schema/([^/]+)/accept)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, snapshot_json(wb.accept(req.matches[1], base_version_of(body_of(req)))));
              }));

  server.Get("/api/diff", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
               auto c = split_ids(req, "c");
               auto t = split_ids(req, "t");
               if (c.size() != 1) throw Error(ErrorCode::Precondition, "diff needs exactly one candidate id 'c'");
               eval::GroundTruthSet truth;
               for (const auto& id : t) truth.alternatives.push_back(wb.get(id).schema);
               auto report = eval::diff(wb.get(c[0]).schema, truth);
               send_json(res, 200, eval::to_json(report));
             }));

  server.Get(R"(/api/session/([^/]+)/transcript)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
               auto records = wb.transcript(req.matches[1]);
               json arr = json::array();
               int turns = 0;
               for (const auto& r : records) {
                 arr.push_back(llm::to_json(r));
                 turns = std::max(turns, r.turn);
               }
               send_json(res, 200, {{"session_id", std::string(req.matches[1])}, {"turns", turns}, {"records", arr}});
             }));

  if (!cfg.static_dir.empty()) server.set_mount_point("/", cfg.static_dir);
}

int serve(const ServeConfig& cfg) {
  check_serve_config(cfg);
  auto client = llm::make_client(cfg.llm_backend, cfg.record_path);
  llm::BundleOverrides overrides;
  overrides.data_dir = cfg.data_dir;
  Workbench wb(client, llm::build_bundle(cfg.prompt_mode, overrides), cfg.client_config);
  httplib::Server server;
  mount(server, wb, cfg);
  std::cerr << "listening on http://" << cfg.host << ":" << cfg.port << "\n";
  if (!server.listen(cfg.host, cfg.port)) {
    std::cerr << "cannot bind " << cfg.host << ":" << cfg.port << "\n";
    return 2;
  }
  return 0;
}

}  // namespace dfmforge::service
