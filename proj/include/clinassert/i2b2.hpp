#ifndef CLINASSERT_I2B2_HPP
#define CLINASSERT_I2B2_HPP

// Reader for the 2010 i2b2/VA assertion release: one .txt per note (one
// sentence per line, tokens separated by spaces) and one .ast per note with
// lines of the form
//
//   c="chest pain" 12:3 12:4||t="problem"||a="absent"
//
// where positions are line:token, lines counted from 1 and tokens from 0.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/regex.hpp>

#include "clinassert/error.hpp"
#include "clinassert/types.hpp"
#include "clinassert/unicode.hpp"

namespace clinassert {

struct I2b2Note {
  Document document;
  std::vector<Annotation> gold;
};

namespace detail {

// Scalar [begin, end) of every whitespace-delimited token, grouped by line.
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> i2b2_token_spans(const Utf8Text& text) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> lines(1);
  std::size_t start = 0;
  bool in_token = false;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool end_of_text = i == text.size();
    const char32_t c = end_of_text ? U'\n' : text[i];
    const bool space = is_space(c);
    if (space && in_token) {
      lines.back().emplace_back(start, i);
      in_token = false;
    } else if (!space && !in_token) {
      start = i;
      in_token = true;
    }
    if (c == U'\n' && !end_of_text) lines.emplace_back();
  }
  return lines;
}

}  // namespace detail

/// Converts one note. The chunk text is taken from the note itself; the
/// concept string in the .ast file is only used as a consistency check.
inline I2b2Note convert_i2b2_note(const std::string& txt_path, const std::string& ast_path) {
  std::ifstream txt(txt_path, std::ios::binary);
  if (!txt) throw ParseError(txt_path, 0, "cannot open note");
  std::ostringstream body;
  body << txt.rdbuf();

  I2b2Note note;
  note.document.doc_id = std::filesystem::path(txt_path).stem().string();
  note.document.text = body.str();
  const Utf8Text text(note.document.text);
  const auto lines = detail::i2b2_token_spans(text);

  std::ifstream ast(ast_path);
  if (!ast) throw ParseError(ast_path, 0, "cannot open assertion file");
  static const boost::regex row(R"re(c="(.*)" (\d+):(\d+) (\d+):(\d+)\|\|t="([^"]*)"\|\|a="([^"]*)"\s*)re");
  std::string line;
  for (std::size_t n = 1; std::getline(ast, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize_space(line).empty()) continue;
    boost::smatch m;
    if (!boost::regex_match(line, m, row)) throw ParseError(ast_path, n, "unrecognized assertion line");
    auto token = [&](std::size_t l, std::size_t t) -> const std::pair<std::size_t, std::size_t>& {
      if (l == 0 || l > lines.size() || t >= lines[l - 1].size())
        throw ParseError(ast_path, n, "position " + std::to_string(l) + ":" + std::to_string(t) + " is outside the note");
      return lines[l - 1][t];
    };
    const auto& first = token(std::stoul(m[2]), std::stoul(m[3]));
    const auto& last = token(std::stoul(m[4]), std::stoul(m[5]));
    if (last.second <= first.first) throw ParseError(ast_path, n, "concept ends before it begins");

    Chunk chunk{note.document.doc_id, std::string(text.slice(first.first, last.second)), first.first, last.second, {}, {}};
    if (fold_case(normalize_space(chunk.text)) != fold_case(normalize_space(m[1].str())))
      throw ParseError(ast_path, n, "concept '" + m[1].str() + "' does not match note text '" + chunk.text + "'");
    const auto label = parse_assertion(m[7].str());
    if (!label) throw ParseError(ast_path, n, "unknown assertion '" + m[7].str() + "'");
    note.gold.push_back(make_annotation(std::move(chunk), AssertionLabel(*label), 1.0, "i2b2"));
  }
  std::stable_sort(note.gold.begin(), note.gold.end(), [](const Annotation& a, const Annotation& b) {
    return a.chunk.begin != b.chunk.begin ? a.chunk.begin < b.chunk.begin : a.chunk.end < b.chunk.end;
  });
  return note;
}

/// Converts every note in `ast_dir` that has a matching .txt in `txt_dir`,
/// in file-name order.
inline std::vector<I2b2Note> convert_i2b2(const std::string& txt_dir, const std::string& ast_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(ast_dir)) throw ParseError(ast_dir, 0, "not a directory");
  std::vector<fs::path> ast_files;
  for (const auto& e : fs::directory_iterator(ast_dir))
    if (e.is_regular_file() && e.path().extension() == ".ast") ast_files.push_back(e.path());
  std::sort(ast_files.begin(), ast_files.end());
  if (ast_files.empty()) throw ParseError(ast_dir, 0, "no .ast files");

  std::vector<I2b2Note> notes;
  for (const auto& ast : ast_files) {
    const fs::path txt = fs::path(txt_dir) / (ast.stem().string() + ".txt");
    if (!fs::exists(txt)) throw ParseError(ast.string(), 0, "missing note " + txt.string());
    notes.push_back(convert_i2b2_note(txt.string(), ast.string()));
  }
  return notes;
}

}  // namespace clinassert

#endif  // CLINASSERT_I2B2_HPP
