#include <deque>
#include <map>
#include <set>

#include "dfmforge/core/error.hpp"
#include "dfmforge/draft/relational.hpp"

namespace dfmforge::draft {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& prefix) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + prefix + parts[i];
  return out;
}

std::string key_node(const Table& t) { return join(t.primary_key, t.name + "."); }

void reject_cycles(const RelationalSchema& rel, const Table& fact) {
  enum class State { Fresh, Open, Done };
  std::map<std::string, State> state;
  std::vector<std::string> path;
  auto visit = [&](auto&& self, const Table& t) -> void {
    state[t.name] = State::Open;
    path.push_back(t.name);
    for (const auto& fk : t.foreign_keys) {
      auto s = state[fk.target_table];
      if (s == State::Open) {
        std::string cycle;
        auto it = std::find(path.begin(), path.end(), fk.target_table);
        for (; it != path.end(); ++it) cycle += *it + " -> ";
        throw Error(ErrorCode::CyclicForeignKeys, "foreign keys form a cycle: " + cycle + fk.target_table,
                    fk.target_table);
      }
      if (s == State::Fresh) self(self, *rel.find_table(fk.target_table));
    }
    path.pop_back();
    state[t.name] = State::Done;
  };
  visit(visit, fact);
}

// Arcs for the FKs of `t`, leaving from `from`. Several FKs to one target
// are told apart by their column names.
void add_fk_arcs(const RelationalSchema& rel, const Table& t, const std::string& from, core::DfmSchema& out,
                 std::deque<const Table*>& queue, std::set<std::string>& queued) {
  std::map<std::string, int> per_target;
  for (const auto& fk : t.foreign_keys) per_target[fk.target_table] += 1;
  for (const auto& fk : t.foreign_keys) {
    const Table* target = rel.find_table(fk.target_table);
    std::optional<std::string> role;
    if (per_target[fk.target_table] > 1) role = join(fk.columns, "");
    out.dependencies.push_back({from, key_node(*target), role});
    if (queued.insert(target->name).second) queue.push_back(target);
  }
}

}  // namespace

core::DfmSchema derive_draft(const RelationalSchema& rel, const DraftConfig& config) {
  const Table* fact = rel.find_table(config.fact_table);
  if (!fact) throw Error(ErrorCode::UnknownFactTable, "no table named '" + config.fact_table + "'", config.fact_table);
  reject_cycles(rel, *fact);

  core::DfmSchema out;
  out.fact = fact->name;
  auto qualified = [&](const Table& t, const std::string& c) { return t.name + "." + c; };

  std::set<std::string> measure_columns;
  if (config.measure_rule == MeasureRule::ExplicitList) {
    for (const auto& m : config.measures) {
      if (!fact->find_column(m) || fact->in_primary_key(m) || fact->in_foreign_key(m))
        throw Error(ErrorCode::UnknownColumn, "'" + m + "' is not a non-key column of " + fact->name, m);
      measure_columns.insert(m);
    }
  } else {
    for (const auto& c : fact->columns)
      if (c.is_numeric && !fact->in_primary_key(c.name) && !fact->in_foreign_key(c.name)) measure_columns.insert(c.name);
  }

  for (const auto& c : fact->columns) {
    if (!measure_columns.count(c.name)) continue;
    out.measures.push_back({qualified(*fact, c.name), core::Additivity::Additive});
    out.dependencies.push_back({fact->name, qualified(*fact, c.name), std::nullopt});
  }
  for (const auto& c : fact->columns) {
    if (measure_columns.count(c.name) || fact->in_foreign_key(c.name)) continue;
    out.dependencies.push_back({fact->name, qualified(*fact, c.name), std::nullopt});
  }

  std::deque<const Table*> queue;
  std::set<std::string> queued{fact->name};
  add_fk_arcs(rel, *fact, fact->name, out, queue, queued);
  while (!queue.empty()) {
    const Table* t = queue.front();
    queue.pop_front();
    auto key = key_node(*t);
    for (const auto& c : t->columns)
      if (!t->in_primary_key(c.name) && !t->in_foreign_key(c.name))
        out.dependencies.push_back({key, qualified(*t, c.name), std::nullopt});
    add_fk_arcs(rel, *t, key, out, queue, queued);
  }
  return out;
}

}  // namespace dfmforge::draft
