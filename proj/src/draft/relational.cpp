#include "dfmforge/draft/relational.hpp"

#include <algorithm>
#include <set>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"

namespace dfmforge::draft {

using nlohmann::json;

const Column* Table::find_column(std::string_view column) const {
  for (const auto& c : columns)
    if (c.name == column) return &c;
  return nullptr;
}

bool Table::in_primary_key(std::string_view column) const {
  return std::find(primary_key.begin(), primary_key.end(), column) != primary_key.end();
}

bool Table::in_foreign_key(std::string_view column) const {
  for (const auto& fk : foreign_keys)
    if (std::find(fk.columns.begin(), fk.columns.end(), column) != fk.columns.end()) return true;
  return false;
}

const Table* RelationalSchema::find_table(std::string_view name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

void check_relational(const RelationalSchema& rel) {
  if (rel.tables.empty()) throw Error(ErrorCode::EmptySchema, "the relational schema has no tables");
  std::set<std::string> names;
  for (const auto& t : rel.tables) {
    if (t.name.empty()) throw Error(ErrorCode::InvalidTable, "table with an empty name");
    if (!names.insert(t.name).second) throw Error(ErrorCode::InvalidTable, "table '" + t.name + "' defined twice", t.name);
    std::set<std::string> cols;
    for (const auto& c : t.columns) {
      if (c.name.empty()) throw Error(ErrorCode::InvalidTable, "empty column name in '" + t.name + "'", t.name);
      if (!cols.insert(c.name).second)
        throw Error(ErrorCode::InvalidTable, "column '" + c.name + "' repeated in '" + t.name + "'", t.name);
    }
    if (t.primary_key.empty()) throw Error(ErrorCode::InvalidTable, "table '" + t.name + "' has no primary key", t.name);
    for (const auto& k : t.primary_key)
      if (!cols.count(k))
        throw Error(ErrorCode::UnknownColumn, "key column '" + t.name + "." + k + "' does not exist", t.name + "." + k);
  }
  for (const auto& t : rel.tables) {
    for (const auto& fk : t.foreign_keys) {
      if (fk.columns.empty()) throw Error(ErrorCode::InvalidTable, "empty foreign key in '" + t.name + "'", t.name);
      for (const auto& c : fk.columns)
        if (!t.find_column(c))
          throw Error(ErrorCode::UnknownColumn, "FK column '" + t.name + "." + c + "' does not exist", t.name + "." + c);
      const Table* target = rel.find_table(fk.target_table);
      if (!target)
        throw Error(ErrorCode::BrokenForeignKey,
                    "'" + t.name + "' references missing table '" + fk.target_table + "'", fk.target_table);
      if (target->primary_key.size() != fk.columns.size())
        throw Error(ErrorCode::BrokenForeignKey,
                    "FK from '" + t.name + "' has " + std::to_string(fk.columns.size()) + " columns but the key of '" +
                        target->name + "' has " + std::to_string(target->primary_key.size()),
                    fk.target_table);
    }
  }
}

namespace {

[[noreturn]] void syntax(const std::string& message) { throw Error(ErrorCode::RelationalSyntax, message); }

std::string string_of(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) syntax(where + ": '" + key + "' must be a string");
  return j[key].get<std::string>();
}

std::vector<std::string> strings_of(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& v = j[key];
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) syntax(where + ": '" + key + "' must be a list of names");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) syntax(where + ": '" + key + "' must be a list of names");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace

RelationalSchema relational_from_json(const json& j) {
  if (!j.is_object() || !j.contains("tables")) syntax("expected an object with a 'tables' list");
  if (!j["tables"].is_array()) syntax("'tables' must be a list");
  RelationalSchema rel;
  for (const auto& tj : j["tables"]) {
    if (!tj.is_object()) syntax("each table must be an object");
    Table t;
    t.name = string_of(tj, "name", "table");
    auto where = "table '" + t.name + "'";
    if (!tj.contains("columns") || !tj["columns"].is_array()) syntax(where + ": 'columns' must be a list");
    for (const auto& cj : tj["columns"]) {
      if (cj.is_string()) {
        t.columns.push_back({cj.get<std::string>(), false});
        continue;
      }
      if (!cj.is_object()) syntax(where + ": a column is a name or an object");
      Column c{string_of(cj, "name", where), false};
      if (cj.contains("is_numeric")) {
        const auto& v = cj["is_numeric"];
        if (v.is_boolean()) c.is_numeric = v.get<bool>();
        else syntax(where + ": 'is_numeric' must be true or false");
      }
      t.columns.push_back(std::move(c));
    }
    t.primary_key = strings_of(tj, "primary_key", where);
    if (tj.contains("foreign_keys")) {
      if (!tj["foreign_keys"].is_array()) syntax(where + ": 'foreign_keys' must be a list");
      for (const auto& fj : tj["foreign_keys"]) {
        if (!fj.is_object()) syntax(where + ": each foreign key must be an object");
        t.foreign_keys.push_back({strings_of(fj, "columns", where), string_of(fj, "target_table", where)});
      }
    }
    rel.tables.push_back(std::move(t));
  }
  check_relational(rel);
  return rel;
}

RelationalSchema load_relational(std::string_view text) {
  json j;
  try {
    j = core::parse_document(text);
  } catch (const Error& e) {
    syntax(e.what());
  }
  return relational_from_json(j);
}

json to_json(const RelationalSchema& rel) {
  json tables = json::array();
  for (const auto& t : rel.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"is_numeric", c.is_numeric}});
    json fks = json::array();
    for (const auto& fk : t.foreign_keys) fks.push_back({{"columns", fk.columns}, {"target_table", fk.target_table}});
    tables.push_back({{"name", t.name}, {"columns", cols}, {"primary_key", t.primary_key}, {"foreign_keys", fks}});
  }
  return {{"tables", tables}};
}

}  // namespace dfmforge::draft
