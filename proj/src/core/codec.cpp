#include "dfmforge/core/codec.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dfmforge/core/error.hpp"

namespace dfmforge::core {

namespace {

constexpr std::array<std::string_view, 5> kTopLevelTags = {"fact", "measures", "dependencies",
                                                           "descriptive", "optional"};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

void reject_unknown_tags(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                         const ParseOptions& options, std::string_view where) {
  if (!options.strict || !map.IsMap()) return;
  for (const auto& kv : map) {
    auto key = kv.first.Scalar();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::UnknownTag,
                  "unknown tag '" + key + "' in " + std::string(where), key);
  }
}

std::string scalar_name(const YAML::Node& node, std::string_view tag) {
  if (!node || node.IsNull() || !node.IsScalar())
    throw Error(ErrorCode::NonScalarName, "'" + std::string(tag) + "' must be a scalar name",
                std::string(tag));
  auto value = node.Scalar();
  if (trim(value).empty())
    throw Error(ErrorCode::EmptyName, "'" + std::string(tag) + "' is empty", std::string(tag));
  return value;
}

// A list item naming a node: either `- name: X` or a bare `- X`.
std::string item_name(const YAML::Node& item, std::string_view list, const ParseOptions& options) {
  if (item.IsMap()) {
    reject_unknown_tags(item, {"name"}, options, list);
    auto name = item["name"];
    if (!name) throw Error(ErrorCode::MissingTag, "item under '" + std::string(list) + "' has no 'name'", "name");
    return scalar_name(name, "name");
  }
  return scalar_name(item, list);
}

std::vector<std::string> name_list(const YAML::Node& node, std::string_view tag,
                                   const ParseOptions& options) {
  std::vector<std::string> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence())
    throw Error(ErrorCode::YamlSyntax, "'" + std::string(tag) + "' must be a list", std::string(tag));
  for (const auto& item : node) out.push_back(item_name(item, tag, options));
  return out;
}

DfmSchema schema_from_node(const YAML::Node& root, const ParseOptions& options) {
  if (!root.IsMap()) throw Error(ErrorCode::YamlSyntax, "document is not a mapping");
  if (options.strict) {
    for (const auto& kv : root) {
      auto key = kv.first.Scalar();
      if (std::find(kTopLevelTags.begin(), kTopLevelTags.end(), key) == kTopLevelTags.end())
        throw Error(ErrorCode::UnknownTag, "unknown tag '" + key + "'", key);
    }
  }

  DfmSchema schema;
  auto fact = root["fact"];
  if (!fact) throw Error(ErrorCode::MissingTag, "missing 'fact' tag", "fact");
  if (fact.IsMap()) {
    reject_unknown_tags(fact, {"name"}, options, "fact");
    auto name = fact["name"];
    if (!name) throw Error(ErrorCode::MissingTag, "'fact' has no 'name' tag", "name");
    schema.fact = scalar_name(name, "name");
  } else if (fact.IsScalar() && !options.strict) {
    schema.fact = scalar_name(fact, "fact");
  } else {
    throw Error(ErrorCode::MissingTag, "'fact' has no 'name' tag", "name");
  }

  for (auto& rendered : name_list(root["measures"], "measures", options))
    schema.measures.push_back(split_measure_name(rendered));

  auto deps = root["dependencies"];
  if (deps && !deps.IsNull()) {
    if (!deps.IsSequence())
      throw Error(ErrorCode::YamlSyntax, "'dependencies' must be a list", "dependencies");
    for (const auto& item : deps) {
      if (!item.IsMap())
        throw Error(ErrorCode::YamlSyntax, "dependency items must be mappings", "dependencies");
      reject_unknown_tags(item, {"from", "to", "role"}, options, "dependencies");
      if (!item["from"]) throw Error(ErrorCode::MissingTag, "dependency without 'from'", "from");
      if (!item["to"]) throw Error(ErrorCode::MissingTag, "dependency without 'to'", "to");
      Dependency d{scalar_name(item["from"], "from"), scalar_name(item["to"], "to"), std::nullopt};
      auto role = item["role"];
      if (role && !role.IsNull()) {
        if (!role.IsScalar())
          throw Error(ErrorCode::NonScalarName, "'role' must be a scalar", "role");
        if (!trim(role.Scalar()).empty()) d.role = role.Scalar();
      }
      schema.dependencies.push_back(std::move(d));
    }
  }

  schema.descriptive = name_list(root["descriptive"], "descriptive", options);
  schema.optional = name_list(root["optional"], "optional", options);
  return schema;
}

nlohmann::json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : node) j[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& x : node) j.push_back(yaml_to_json(x));
      return j;
    }
    case YAML::NodeType::Scalar: {
      auto text = node.Scalar();
      if (node.Tag() == "?") {
        if (text == "true") return true;
        if (text == "false") return false;
      }
      return text;
    }
    default:
      return nullptr;
  }
}

YAML::Node to_yaml_node(const nlohmann::json& j) {
  if (j.is_object()) {
    YAML::Node n(YAML::NodeType::Map);
    for (const auto& [k, v] : j.items()) n[k] = to_yaml_node(v);
    return n;
  }
  if (j.is_array()) {
    YAML::Node n(YAML::NodeType::Sequence);
    for (const auto& v : j) n.push_back(to_yaml_node(v));
    return n;
  }
  if (j.is_null()) return YAML::Node(YAML::NodeType::Null);
  if (j.is_string()) return YAML::Node(j.get<std::string>());
  return YAML::Node(j.dump());
}

bool is_reserved_word(std::string_view s) {
  static constexpr std::array<std::string_view, 22> kWords = {
      "null", "Null", "NULL", "~",    "true", "True", "TRUE", "false", "False", "FALSE", "yes",
      "Yes",  "YES",  "no",   "No",   "NO",   "on",   "On",   "ON",    "off",   "Off",   "OFF"};
  return std::find(kWords.begin(), kWords.end(), s) != kWords.end();
}

bool needs_quotes(std::string_view s) {
  if (s.empty() || is_reserved_word(s)) return true;
  if (s.front() == ' ' || s.back() == ' ') return true;
  if (std::string_view("-?:,[]{}#&*!|>'\"%@`").find(s.front()) != std::string_view::npos) return true;
  if (s.back() == ':') return true;
  if (s.find(": ") != std::string_view::npos || s.find(" #") != std::string_view::npos) return true;
  if (s == "---" || s == "...") return true;
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x20 || c == 0x7f; });
}

void emit_named_list(std::ostringstream& out, std::string_view tag,
                     const std::vector<std::string>& names) {
  out << tag << ":";
  if (names.empty()) {
    out << " []\n";
    return;
  }
  out << "\n";
  for (const auto& n : names) out << "  - name: " << yaml_scalar(n) << "\n";
}

}  // namespace

std::string yaml_scalar(std::string_view text) {
  if (!needs_quotes(text)) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

DfmSchema parse_yaml(std::string_view text, const ParseOptions& options) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::YamlSyntax, e.what());
  }
  try {
    return schema_from_node(root, options);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::YamlSyntax, e.what());
  }
}

std::string serialize_yaml(const DfmSchema& schema) {
  std::ostringstream out;
  out << "fact:\n  name: " << yaml_scalar(schema.fact) << "\n";

  std::vector<std::string> measures;
  for (const auto& m : schema.measures) measures.push_back(m.rendered());
  emit_named_list(out, "measures", measures);

  auto deps = schema.dependencies;
  std::sort(deps.begin(), deps.end());
  out << "dependencies:";
  if (deps.empty()) out << " []";
  out << "\n";
  for (const auto& d : deps) {
    out << "  - from: " << yaml_scalar(d.from) << "\n";
    out << "    to: " << yaml_scalar(d.to) << "\n";
    if (d.role) out << "    role: " << yaml_scalar(*d.role) << "\n";
  }

  if (!schema.descriptive.empty()) emit_named_list(out, "descriptive", schema.descriptive);
  if (!schema.optional.empty()) emit_named_list(out, "optional", schema.optional);
  return out.str();
}

nlohmann::json to_json(const DfmSchema& schema) {
  auto named = [](const std::vector<std::string>& names) {
    auto arr = nlohmann::json::array();
    for (const auto& n : names) arr.push_back({{"name", n}});
    return arr;
  };
  std::vector<std::string> measures;
  for (const auto& m : schema.measures) measures.push_back(m.rendered());
  auto deps = schema.dependencies;
  std::sort(deps.begin(), deps.end());
  auto dep_arr = nlohmann::json::array();
  for (const auto& d : deps) {
    nlohmann::json item = {{"from", d.from}, {"to", d.to}};
    if (d.role) item["role"] = *d.role;
    dep_arr.push_back(std::move(item));
  }
  return {{"fact", {{"name", schema.fact}}},
          {"measures", named(measures)},
          {"dependencies", std::move(dep_arr)},
          {"descriptive", named(schema.descriptive)},
          {"optional", named(schema.optional)}};
}

DfmSchema from_json(const nlohmann::json& json, const ParseOptions& options) {
  if (!json.is_object()) throw Error(ErrorCode::YamlSyntax, "schema JSON is not an object");
  return schema_from_node(to_yaml_node(json), options);
}

nlohmann::json parse_document(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::YamlSyntax, std::string("JSON: ") + e.what());
    }
  }
  try {
    return yaml_to_json(YAML::Load(std::string(text)));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::YamlSyntax, e.what());
  }
}

}  // namespace dfmforge::core
