#include "mutations.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace dfmforge::testing {

namespace {

std::string squash(const std::string& s) {
  std::string out;
  for (unsigned char c : s)
    if (c >= 0x80 || std::isalnum(c)) out += static_cast<char>(std::tolower(c));
  return out;
}

bool toggle(std::vector<std::string>& marks, const std::string& node) {
  auto it = std::find(marks.begin(), marks.end(), node);
  if (it == marks.end())
    marks.push_back(node);
  else
    marks.erase(it);
  return true;
}

void rename_everywhere(core::DfmSchema& s, const std::string& from, const std::string& to) {
  for (auto& d : s.dependencies) {
    if (d.from == from) d.from = to;
    if (d.to == from) d.to = to;
  }
  for (auto* marks : {&s.descriptive, &s.optional})
    for (auto& m : *marks)
      if (m == from) m = to;
}

// Same-kind names of `truth`, squashed.
std::vector<std::string> peers(const core::DfmSchema& truth, const std::string& node) {
  std::vector<std::string> out;
  auto kind = truth.kind_of(node);
  for (const auto& n : truth.nodes()) {
    if (n == node || truth.kind_of(n) != kind) continue;
    auto m = truth.find_measure(n);
    out.push_back(squash(m && truth.is_measure_node(n) ? m->name : n));
  }
  return out;
}

}  // namespace

std::optional<Mutated> inject_mutations(std::mt19937_64& rng, const core::DfmSchema& truth, int k) {
  Mutated out{truth, {}};
  auto& s = out.schema;
  std::set<std::string> reserved;
  std::set<std::string> used_names;
  for (const auto& n : truth.nodes()) used_names.insert(squash(n));
  for (const auto& m : truth.measures) used_names.insert(squash(m.name));

  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  int attempts = 0;
  while (static_cast<int>(out.log.size()) < k) {
    if (++attempts > 400) return std::nullopt;
    auto nodes = s.nodes();
    switch (pick(5)) {
      case 0: {  // delete an arc
        if (s.dependencies.empty()) break;
        auto i = pick(s.dependencies.size());
        auto d = s.dependencies[i];
        if (reserved.count(d.to) || (d.from != s.fact && reserved.count(d.from))) break;
        s.dependencies.erase(s.dependencies.begin() + static_cast<std::ptrdiff_t>(i));
        reserved.insert(d.to);
        if (d.from != s.fact) reserved.insert(d.from);
        out.log.push_back("delete arc " + d.from + " -> " + d.to);
        break;
      }
      case 1:
      case 2: {  // flip a mark
        auto attrs = s.attributes();
        if (attrs.empty()) break;
        auto a = attrs[pick(attrs.size())];
        if (reserved.count(a)) break;
        bool descriptive = pick(2) == 0;
        toggle(descriptive ? s.descriptive : s.optional, a);
        reserved.insert(a);
        out.log.push_back(std::string("flip ") + (descriptive ? "descriptive " : "optional ") + a);
        break;
      }
      case 3: {  // flip additivity
        if (s.measures.empty()) break;
        auto& m = s.measures[pick(s.measures.size())];
        auto old = m.rendered();
        if (reserved.count(old)) break;
        m.additivity = m.additivity == core::Additivity::Additive ? core::Additivity::NonAdditive
                                                                  : core::Additivity::Additive;
        rename_everywhere(s, old, m.rendered());
        reserved.insert(m.rendered());
        out.log.push_back("additivity " + old + " -> " + m.rendered());
        break;
      }
      case 4: {  // affix rename
        auto node = nodes[pick(nodes.size())];
        if (reserved.count(node) || !truth.has_node(node)) break;
        core::Measure* m = nullptr;
        for (auto& candidate : s.measures)
          if (candidate.rendered() == node) m = &candidate;
        std::string base = m ? m->name : node;
        std::string fresh = pick(2) ? base + "Zq" : "Qz" + base;
        auto key = squash(fresh);
        auto own = squash(base);
        if (used_names.count(key)) break;
        bool clash = false;
        for (const auto& p : peers(truth, node))
          if (p.find(own) != std::string::npos || key.find(p) != std::string::npos) clash = true;
        if (clash) break;
        if (m) {
          auto old = m->rendered();
          m->name = fresh;
          rename_everywhere(s, old, m->rendered());
          reserved.insert(m->rendered());
        } else {
          if (node == s.fact) s.fact = fresh;
          rename_everywhere(s, node, fresh);
          reserved.insert(fresh);
        }
        used_names.insert(key);
        out.log.push_back("rename " + base + " -> " + fresh);
        break;
      }
    }
  }
  return out;
}

}  // namespace dfmforge::testing
