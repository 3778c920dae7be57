#include "dfmforge/llm/extract.hpp"

#include <vector>

#include "dfmforge/core/codec.hpp"
#include "dfmforge/core/error.hpp"

namespace dfmforge::llm {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

std::string join(const std::vector<std::string_view>& lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    out.append(lines[i]);
    out += '\n';
  }
  return out;
}

std::optional<core::DfmSchema> try_parse(const std::string& yaml) {
  try {
    auto s = core::parse_yaml(yaml);
    if (s.fact.empty()) return std::nullopt;
    return s;
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool is_fence(std::string_view line) {
  auto p = line.find_first_not_of(" \t");
  return p != std::string_view::npos && line.substr(p, 3) == "```";
}

bool is_schema_tag(std::string_view line) {
  for (std::string_view tag : {"fact:", "measures:", "dependencies:", "descriptive:", "optional:"})
    if (line.substr(0, tag.size()) == tag) return true;
  return false;
}

// Lines that can continue a top-level YAML region.
bool continues_region(std::string_view line) {
  if (line.empty() || line[0] == ' ' || line[0] == '\t') return true;
  return is_schema_tag(line) || line.substr(0, 2) == "- " || line == "-";
}

}  // namespace

std::optional<Extracted> find_schema(std::string_view response) {
  auto lines = split_lines(response);

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    std::size_t j = i + 1;
    while (j < lines.size() && !is_fence(lines[j])) ++j;
    auto body = join(lines, i + 1, j);
    if (auto s = try_parse(body)) return Extracted{body, *s};
    i = j;
  }

  std::optional<Extracted> best;
  for (std::size_t start = 0; start < lines.size(); ++start) {
    if (!is_schema_tag(lines[start])) continue;
    std::size_t end = start + 1;
    while (end < lines.size() && continues_region(lines[end]) && !is_fence(lines[end])) ++end;
    for (std::size_t stop = end; stop > start; --stop) {
      if (lines[stop - 1].find_first_not_of(" \t") == std::string_view::npos && stop != end) continue;
      auto body = join(lines, start, stop);
      if (best && body.size() <= best->yaml.size()) break;
      if (auto s = try_parse(body)) {
        best = Extracted{body, *s};
        break;
      }
    }
  }
  return best;
}

Extracted extract_schema(std::string_view response) {
  auto found = find_schema(response);
  if (!found) throw Error(ErrorCode::ExtractionFailure, "no YAML schema with a fact tag in the answer");
  return *found;
}

}  // namespace dfmforge::llm
