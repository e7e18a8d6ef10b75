#ifndef CLINASSERT_NEGEX_HPP
#define CLINASSERT_NEGEX_HPP

#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clinassert/error.hpp"
#include "clinassert/phrase_trie.hpp"
#include "clinassert/text.hpp"
#include "clinassert/types.hpp"

namespace clinassert {

enum class CueKind { pre_neg, post_neg, pseudo_neg, termination };

constexpr std::string_view to_string(CueKind k) noexcept {
  switch (k) {
    case CueKind::pre_neg: return "PRE_NEG";
    case CueKind::post_neg: return "POST_NEG";
    case CueKind::pseudo_neg: return "PSEUDO_NEG";
    case CueKind::termination: return "TERMINATION";
  }
  return "";
}

inline std::optional<CueKind> parse_cue_kind(std::string_view s) {
  for (CueKind k : {CueKind::pre_neg, CueKind::post_neg, CueKind::pseudo_neg, CueKind::termination})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct NegexCue {
  std::string phrase;
  CueKind kind = CueKind::pre_neg;
};

struct NegexConfig {
  std::vector<NegexCue> cues;
  std::size_t max_scope = 5;
  bool sentence_bounded = true;
};

/// A cue occurrence in a document, token indices inclusive.
struct CueMatch {
  CueKind kind;
  std::size_t first;
  std::size_t last;
};

/// NegEx over token phrases. The cue inventory is compiled once into a
/// phrase trie; annotate() is const and may be called from many threads.
class NegexAnnotator {
 public:
  explicit NegexAnnotator(NegexConfig config) : config_(std::move(config)) {
    if (config_.cues.empty()) throw ConfigError("negex: cue list is empty");
    if (config_.max_scope < 1) throw ConfigError("negex: max_scope must be at least 1");
    for (auto& cue : config_.cues) {
      cue.phrase = normalize_space(fold_case(cue.phrase));
      const auto words = phrase_words(cue.phrase, true);
      if (words.empty()) throw ConfigError("negex: empty cue phrase");
      if (!trie_.insert(words, cue.kind)) throw ConfigError("negex: duplicate cue '" + cue.phrase + "'");
    }
  }

  const NegexConfig& config() const noexcept { return config_; }

  /// Longest-match, left-to-right, non-overlapping cue scan. With
  /// sentence_bounded set no match crosses a sentence boundary.
  std::vector<CueMatch> find_cues(const AnalyzedDocument& doc) const {
    const auto words = token_words(doc.tokens(), true);
    std::vector<CueMatch> matches;
    auto scan = [&](std::size_t begin, std::size_t end) {
      std::size_t i = begin;
      while (i < end) {
        if (auto m = trie_.longest(words, i, end)) {
          matches.push_back(CueMatch{*m->payload, i, i + m->length - 1});
          i += m->length;
        } else {
          ++i;
        }
      }
    };
    if (config_.sentence_bounded) {
      for (const auto& s : doc.sentences()) scan(s.token_begin, s.token_end + 1);
    } else {
      scan(0, doc.tokens().size());
    }
    return matches;
  }

  /// One annotation per chunk: absent when a PRE_NEG or POST_NEG cue scopes
  /// over it, present otherwise. Unaligned chunks are aligned first.
  std::vector<Annotation> annotate(const AnalyzedDocument& doc, std::span<const Chunk> chunks) const {
    const auto cues = find_cues(doc);
    std::vector<Annotation> out;
    out.reserve(chunks.size());
    for (const Chunk& raw : chunks) {
      Chunk chunk = raw.aligned() ? raw : doc.align(raw);
      const bool negated = in_negation_scope(doc, cues, *chunk.token_begin, *chunk.token_end);
      out.push_back(Annotation{std::move(chunk), negated ? Assertion::absent : Assertion::present,
                               1.0, "negex"});
    }
    return out;
  }

 private:
  bool in_negation_scope(const AnalyzedDocument& doc, const std::vector<CueMatch>& cues,
                         std::size_t tb, std::size_t te) const {
    auto same_sentence = [&](std::size_t a, std::size_t b) {
      return !config_.sentence_bounded || doc.sentence_of(a).index == doc.sentence_of(b).index;
    };
    auto terminated = [&](std::size_t lo, std::size_t hi) {
      for (const auto& c : cues)
        if (c.kind == CueKind::termination && c.first > lo && c.last < hi) return true;
      return false;
    };
    for (const auto& c : cues) {
      if (c.kind == CueKind::pre_neg && c.last < tb) {
        if (tb - c.last - 1 < config_.max_scope && same_sentence(c.last, tb) && !terminated(c.last, tb))
          return true;
      } else if (c.kind == CueKind::post_neg && c.first > te) {
        if (c.first - te - 1 < config_.max_scope && same_sentence(te, c.first) && !terminated(te, c.first))
          return true;
      }
    }
    return false;
  }

  NegexConfig config_;
  PhraseTrie<CueKind> trie_;
};

inline std::vector<Annotation> negex_annotate(const AnalyzedDocument& doc, std::span<const Chunk> chunks,
                                              const NegexConfig& config) {
  return NegexAnnotator(config).annotate(doc, chunks);
}

/// Cue file: JSON lines {"phrase": ..., "kind": "PRE_NEG"|"POST_NEG"|"PSEUDO_NEG"|"TERMINATION"}.
inline NegexConfig parse_negex_cues(std::istream& in, const std::string& source) {
  NegexConfig config;
  PhraseTrie<std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (normalize_space(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, lineno, e.what());
    }
    if (!j.is_object() || !j.contains("phrase") || !j["phrase"].is_string() || !j.contains("kind") ||
        !j["kind"].is_string())
      throw ParseError(source, lineno, "expected {\"phrase\": string, \"kind\": string}");
    const auto kind = parse_cue_kind(j["kind"].get<std::string>());
    if (!kind) throw ParseError(source, lineno, "unknown cue kind '" + j["kind"].get<std::string>() + "'");
    std::string phrase = normalize_space(fold_case(j["phrase"].get<std::string>()));
    const auto words = phrase_words(phrase, true);
    if (words.empty()) throw ParseError(source, lineno, "empty cue phrase");
    if (!seen.insert(words, lineno)) throw ParseError(source, lineno, "duplicate cue phrase '" + phrase + "'");
    config.cues.push_back(NegexCue{std::move(phrase), *kind});
  }
  if (config.cues.empty()) throw ParseError(source, 0, "no cues");
  return config;
}

inline NegexConfig load_negex_cues(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open cue file");
  return parse_negex_cues(in, path);
}

}  // namespace clinassert

#endif  // CLINASSERT_NEGEX_HPP
