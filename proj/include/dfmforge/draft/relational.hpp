#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::draft {

struct Column {
  std::string name;
  bool is_numeric = false;
};

struct ForeignKey {
  std::vector<std::string> columns;  // referencing columns, in target key order
  std::string target_table;
};

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  const Column* find_column(std::string_view column) const;
  bool in_primary_key(std::string_view column) const;
  bool in_foreign_key(std::string_view column) const;
};

struct RelationalSchema {
  std::vector<Table> tables;

  const Table* find_table(std::string_view name) const;
};

/// Referential checks: non-empty table list, unique table/column names,
/// non-empty primary keys over existing columns, FK columns that exist and
/// match the target key arity. Throws dfmforge::Error.
void check_relational(const RelationalSchema& rel);

/// Reads the JSON or YAML relational format (YAML is a superset, so one
/// reader serves both) and runs check_relational.
RelationalSchema load_relational(std::string_view text);
RelationalSchema relational_from_json(const nlohmann::json& json);
nlohmann::json to_json(const RelationalSchema& rel);

enum class MeasureRule {
  NumericNonKey,  // numeric fact columns that are neither key nor FK
  ExplicitList,
};

struct DraftConfig {
  std::string fact_table;
  MeasureRule measure_rule = MeasureRule::NumericNonKey;
  std::vector<std::string> measures;  // column names, used with ExplicitList
};

/// Supply-driven draft: chases FKs breadth-first from the fact table.
///
/// Node names follow the draft form `TABLE.column`; a composite key is one
/// node `T.a,T.b`. FK columns do not become nodes of their own: each FK is
/// an arc from the referencing key (or the fact) to the referenced key.
/// When one table has several FKs to the same target, the arcs carry the
/// FK column names as roles.
core::DfmSchema derive_draft(const RelationalSchema& rel, const DraftConfig& config);

}  // namespace dfmforge::draft
