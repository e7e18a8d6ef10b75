#ifndef CLINASSERT_JSONL_HPP
#define CLINASSERT_JSONL_HPP

#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinassert/error.hpp"
#include "clinassert/types.hpp"

namespace clinassert {

/// One row of a chunk, gold or annotation file. All three share the schema
/// {"doc_id", "text", "begin", "end", "label"?, "source"?, "confidence"?}.
struct ChunkRow {
  Chunk chunk;
  std::optional<std::string> label;
  std::optional<std::string> source;
  std::optional<double> confidence;
  std::size_t line = 0;
};

namespace detail {

inline void for_each_json_line(const std::string& path,
                               const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path, lineno, e.what());
    }
    if (!j.is_object()) throw ParseError(path, lineno, "expected a JSON object");
    fn(j, lineno);
  }
}

inline std::string required_string(const nlohmann::json& j, const char* key, const std::string& path,
                                   std::size_t line) {
  if (!j.contains(key) || !j[key].is_string()) throw ParseError(path, line, std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

inline std::size_t required_offset(const nlohmann::json& j, const char* key, const std::string& path,
                                   std::size_t line) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw ParseError(path, line, std::string("field '") + key + "' must be a non-negative integer");
  return j[key].get<std::size_t>();
}

}  // namespace detail

/// Corpus file: {"doc_id", "text"} per line; doc ids must be unique.
inline std::vector<Document> read_corpus(const std::string& path) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    Document d{detail::required_string(j, "doc_id", path, line), detail::required_string(j, "text", path, line)};
    if (d.doc_id.empty()) throw ParseError(path, line, "empty doc_id");
    if (!seen.insert(d.doc_id).second) throw ParseError(path, line, "duplicate doc_id '" + d.doc_id + "'");
    docs.push_back(std::move(d));
  });
  return docs;
}

inline std::vector<ChunkRow> read_chunk_rows(const std::string& path) {
  std::vector<ChunkRow> rows;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    ChunkRow row;
    row.line = line;
    row.chunk.doc_id = detail::required_string(j, "doc_id", path, line);
    row.chunk.text = detail::required_string(j, "text", path, line);
    row.chunk.begin = detail::required_offset(j, "begin", path, line);
    row.chunk.end = detail::required_offset(j, "end", path, line);
    if (row.chunk.begin >= row.chunk.end) throw ParseError(path, line, "begin must be less than end");
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_string()) throw ParseError(path, line, "label must be a string");
      row.label = j["label"].get<std::string>();
    }
    if (j.contains("source")) {
      if (!j["source"].is_string() || j["source"].get<std::string>().empty())
        throw ParseError(path, line, "source must be a nonempty string");
      row.source = j["source"].get<std::string>();
    }
    if (j.contains("confidence")) {
      if (!j["confidence"].is_number()) throw ParseError(path, line, "confidence must be a number");
      const double c = j["confidence"].get<double>();
      if (!(c >= 0.0 && c <= 1.0)) throw ParseError(path, line, "confidence must lie in [0,1]");
      row.confidence = c;
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

/// Labeled rows become annotations; unlabeled rows (abstentions) are skipped.
inline std::vector<Annotation> read_annotations(const std::string& path, const std::string& default_source) {
  std::vector<Annotation> out;
  for (auto& row : read_chunk_rows(path)) {
    if (!row.label) continue;
    out.push_back(Annotation{std::move(row.chunk), AssertionLabel::from_string(*row.label),
                             row.confidence.value_or(1.0), row.source.value_or(default_source)});
  }
  return out;
}

/// Every gold row must carry a label.
inline std::vector<Annotation> read_gold(const std::string& path) {
  std::vector<Annotation> out;
  for (auto& row : read_chunk_rows(path)) {
    if (!row.label) throw ParseError(path, row.line, "gold row has no label");
    out.push_back(Annotation{std::move(row.chunk), AssertionLabel::from_string(*row.label),
                             row.confidence.value_or(1.0), row.source.value_or("gold")});
  }
  return out;
}

inline nlohmann::ordered_json chunk_json(const Chunk& c) {
  return {{"doc_id", c.doc_id}, {"text", c.text}, {"begin", c.begin}, {"end", c.end}};
}

inline nlohmann::ordered_json annotation_json(const Annotation& a) {
  auto j = chunk_json(a.chunk);
  j["label"] = a.label.name();
  j["confidence"] = a.confidence;
  j["source"] = a.source;
  return j;
}

inline void write_annotation_line(std::ostream& os, const Annotation& a) { os << annotation_json(a).dump() << '\n'; }

/// Abstentions are written as bare chunk rows so the file keeps one row per chunk.
inline void write_abstention_line(std::ostream& os, const Chunk& c) { os << chunk_json(c).dump() << '\n'; }

inline void write_annotations(std::ostream& os, const std::vector<Annotation>& annotations) {
  for (const auto& a : annotations) write_annotation_line(os, a);
}

}  // namespace clinassert

#endif  // CLINASSERT_JSONL_HPP
