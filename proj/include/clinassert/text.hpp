#ifndef CLINASSERT_TEXT_HPP
#define CLINASSERT_TEXT_HPP

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "clinassert/error.hpp"
#include "clinassert/types.hpp"
#include "clinassert/unicode.hpp"

namespace clinassert {

/// Tokens that keep their internal and trailing punctuation and never end a
/// sentence. Entries are stored case-folded.
class Abbreviations {
 public:
  Abbreviations() = default;
  Abbreviations(std::initializer_list<std::string_view> entries) {
    for (auto e : entries) add(e);
  }

  /// Built-in clinical list; identical to data/abbreviations.txt.
  static const Abbreviations& clinical() {
    static const Abbreviations list{
        "a.c.", "a.m.", "approx.", "b.i.d.", "b/l", "c/o", "d/c", "dr.", "e.g.", "etc.",
        "h.s.", "h/o", "i.e.", "i.m.", "i.v.", "mr.", "mrs.", "ms.", "n/v", "p.c.",
        "p.m.", "p.o.", "p.r.", "p.r.n.", "prn.", "q.d.", "q.h.s.", "q.i.d.", "s/p", "st.",
        "t.i.d.", "vs.", "w/", "w/o",
    };
    return list;
  }

  /// One entry per line; blank lines and lines starting with '#' are skipped.
  static Abbreviations load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open abbreviation list");
    Abbreviations list;
    std::string line;
    while (std::getline(in, line)) {
      const std::string entry = normalize_space(line);
      if (entry.empty() || entry.front() == '#') continue;
      list.add(entry);
    }
    return list;
  }

  void add(std::string_view entry) { entries_.insert(fold_case(entry)); }
  bool contains(std::string_view word) const { return entries_.contains(fold_case(word)); }
  std::size_t size() const noexcept { return entries_.size(); }

  bool operator==(const Abbreviations&) const = default;

 private:
  std::unordered_set<std::string> entries_;
};

namespace detail {

inline void emit_token(std::vector<Token>& out, const Utf8Text& text, std::size_t b, std::size_t e) {
  out.push_back(Token{out.size(), b, e, std::string(text.slice(b, e))});
}

inline std::string folded_slice(const Utf8Text& text, std::size_t b, std::size_t e) {
  return fold_case(text.slice(b, e));
}

}  // namespace detail

/// Whitespace split, then leading and trailing punctuation become one token
/// per character. Internal punctuation stays ("h/o", "2-3"); a word that is
/// (or becomes, after stripping trailing punctuation) a listed abbreviation
/// keeps its trailing punctuation ("p.r.n.").
inline std::vector<Token> tokenize(const Utf8Text& text,
                                   const Abbreviations& abbrev = Abbreviations::clinical()) {
  std::vector<Token> tokens;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t s = i;
    std::size_t e = i;
    while (e < n && !is_space(text[e])) ++e;
    i = e;

    while (s < e && is_punct(text[s]) && !abbrev.contains(text.slice(s, e))) {
      detail::emit_token(tokens, text, s, s + 1);
      ++s;
    }
    std::size_t core_end = e;
    while (core_end > s && !abbrev.contains(text.slice(s, core_end)) && is_punct(text[core_end - 1]))
      --core_end;
    if (core_end > s) detail::emit_token(tokens, text, s, core_end);
    for (std::size_t k = core_end; k < e; ++k) detail::emit_token(tokens, text, k, k + 1);
  }
  return tokens;
}

inline std::vector<Token> tokenize(const Document& doc,
                                   const Abbreviations& abbrev = Abbreviations::clinical()) {
  return tokenize(Utf8Text(doc.text), abbrev);
}

namespace detail {

inline bool is_terminal_token(const Token& tok) {
  return !tok.surface.empty() && std::all_of(tok.surface.begin(), tok.surface.end(), [](char c) {
    return c == '.' || c == '?' || c == '!';
  });
}

}  // namespace detail

/// A sentence ends at a token made only of [.?!] that is followed by
/// whitespace and an uppercase letter, or at the last token. Abbreviation
/// tokens carry their periods inside the token and therefore never split.
inline std::vector<Sentence> split_sentences(const Utf8Text& text, std::span<const Token> tokens) {
  std::vector<Sentence> sentences;
  if (tokens.empty()) return sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bool boundary = i + 1 == tokens.size();
    if (!boundary && detail::is_terminal_token(tokens[i])) {
      const Token& next = tokens[i + 1];
      boundary = next.begin > tokens[i].end && is_upper(text[next.begin]);
    }
    if (boundary) {
      sentences.push_back(Sentence{sentences.size(), start, i, tokens[start].begin, tokens[i].end});
      start = i + 1;
    }
  }
  return sentences;
}

inline std::vector<Sentence> split_sentences(const Document& doc,
                                             const Abbreviations& abbrev = Abbreviations::clinical()) {
  const Utf8Text text(doc.text);
  const auto tokens = tokenize(text, abbrev);
  return split_sentences(text, tokens);
}

/// Fills chunk.token_begin/token_end. Throws AlignmentError when the span is
/// degenerate, out of bounds, covers no token, or its text disagrees with the
/// covered token surfaces.
inline Chunk align_chunk(const Utf8Text& text, std::span<const Token> tokens, Chunk chunk) {
  auto where = [&] {
    return "chunk '" + chunk.text + "' [" + std::to_string(chunk.begin) + "," +
           std::to_string(chunk.end) + ")" + (chunk.doc_id.empty() ? "" : " in " + chunk.doc_id);
  };
  if (chunk.begin >= chunk.end) throw AlignmentError(where() + ": empty span");
  if (chunk.end > text.size())
    throw AlignmentError(where() + ": span exceeds document length " + std::to_string(text.size()));

  auto first = std::upper_bound(tokens.begin(), tokens.end(), chunk.begin,
                                [](std::size_t pos, const Token& t) { return pos < t.end; });
  auto last = std::lower_bound(tokens.begin(), tokens.end(), chunk.end,
                               [](const Token& t, std::size_t pos) { return t.begin < pos; });
  if (first == tokens.end() || last == tokens.begin() || first >= last)
    throw AlignmentError(where() + ": span covers no token");
  --last;

  const std::string covered = normalize_space(text.slice(first->begin, last->end));
  if (covered != normalize_space(chunk.text))
    throw AlignmentError(where() + ": text disagrees with covered tokens '" + covered + "'");
  chunk.token_begin = first->index;
  chunk.token_end = last->index;
  return chunk;
}

inline Chunk align_chunk(const Document& doc, std::span<const Token> tokens, Chunk chunk) {
  return align_chunk(Utf8Text(doc.text), tokens, std::move(chunk));
}

/// A document together with its tokens and sentences, computed once and
/// shared by every annotator.
class AnalyzedDocument {
 public:
  explicit AnalyzedDocument(Document doc, const Abbreviations& abbrev = Abbreviations::clinical())
      : doc_(std::move(doc)), text_(doc_.text), tokens_(tokenize(text_, abbrev)),
        sentences_(split_sentences(text_, tokens_)) {
    sentence_of_token_.resize(tokens_.size());
    for (const Sentence& s : sentences_)
      for (std::size_t t = s.token_begin; t <= s.token_end; ++t) sentence_of_token_[t] = s.index;
  }

  const Document& document() const noexcept { return doc_; }
  const std::string& id() const noexcept { return doc_.doc_id; }
  const Utf8Text& text() const noexcept { return text_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }

  const Sentence& sentence_of(std::size_t token_index) const {
    return sentences_[sentence_of_token_.at(token_index)];
  }

  Chunk align(Chunk chunk) const { return align_chunk(text_, tokens_, std::move(chunk)); }

 private:
  Document doc_;
  Utf8Text text_;
  std::vector<Token> tokens_;
  std::vector<Sentence> sentences_;
  std::vector<std::size_t> sentence_of_token_;
};

}  // namespace clinassert

#endif  // CLINASSERT_TEXT_HPP
