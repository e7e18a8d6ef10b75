#ifndef CLINASSERT_CONTEXTUAL_HPP
#define CLINASSERT_CONTEXTUAL_HPP

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/regex.hpp>
#include <json.hpp>

#include "clinassert/error.hpp"
#include "clinassert/phrase_trie.hpp"
#include "clinassert/text.hpp"
#include "clinassert/types.hpp"

namespace clinassert {

inline constexpr std::size_t kDefaultScopeBefore = 9;
inline constexpr std::size_t kDefaultScopeAfter = 15;
inline constexpr double kDefaultRuleConfidence = 0.9;

/// Where a regex match must sit relative to the chunk: `pre` matches start
/// at or before the chunk, `post` matches end at or after it.
enum class RegexAnchor { any, pre, post };

struct RegexCue {
  std::string pattern;
  RegexAnchor anchor = RegexAnchor::any;
};

struct ContextualRule {
  std::string name;
  Assertion label = Assertion::absent;
  std::vector<std::string> prefix_cues;
  std::vector<std::string> suffix_cues;
  std::vector<RegexCue> regex_patterns;
  std::vector<std::string> exception_cues;
  std::size_t scope_before = kDefaultScopeBefore;
  std::size_t scope_after = kDefaultScopeAfter;
  bool case_sensitive = false;
  int priority = 0;
  double confidence = kDefaultRuleConfidence;
};

/// Character span (scalar offsets, end exclusive) of whatever made a rule fire.
struct Trigger {
  enum class Kind { prefix, suffix, regex } kind;
  std::size_t begin;
  std::size_t end;
};

/// Immutable compiled rule set. Rules are kept in descending priority order;
/// equal priorities (only possible across labels) keep file order.
class RuleSet {
 public:
  static RuleSet compile(std::vector<ContextualRule> rules) {
    RuleSet set;
    std::map<std::pair<Assertion, int>, std::string> priorities;
    for (auto& rule : rules) {
      const std::string who = rule.name.empty() ? std::string(to_string(rule.label)) + " rule" : rule.name;
      if (rule.prefix_cues.empty() && rule.suffix_cues.empty() && rule.regex_patterns.empty())
        throw ConfigError(who + ": needs at least one prefix cue, suffix cue or regex pattern");
      if (!(rule.confidence > 0.0 && rule.confidence <= 1.0))
        throw ConfigError(who + ": confidence must lie in (0,1]");
      if (!priorities.emplace(std::pair{rule.label, rule.priority}, who).second)
        throw ConfigError(who + ": priority " + std::to_string(rule.priority) + " already used by another " +
                          std::string(to_string(rule.label)) + " rule");
      set.rules_.push_back(Compiled(std::move(rule)));
    }
    std::stable_sort(set.rules_.begin(), set.rules_.end(), [](const Compiled& a, const Compiled& b) {
      return a.rule.priority > b.rule.priority;
    });
    return set;
  }

  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  const ContextualRule& rule(std::size_t i) const { return rules_.at(i).rule; }

  /// Index (in priority order) of the first rule that fires for an aligned
  /// chunk, or nullopt when every rule abstains.
  std::optional<std::size_t> firing_rule(const AnalyzedDocument& doc, const Chunk& chunk) const {
    Context ctx(doc);
    return firing_rule(ctx, chunk);
  }

  /// One slot per input chunk, empty where every rule abstains.
  std::vector<std::optional<Annotation>> annotate_each(const AnalyzedDocument& doc,
                                                       std::span<const Chunk> chunks) const {
    std::vector<std::optional<Annotation>> out;
    out.reserve(chunks.size());
    Context ctx(doc);
    for (const Chunk& raw : chunks) {
      Chunk chunk = raw.aligned() ? raw : doc.align(raw);
      if (auto r = firing_rule(ctx, chunk)) {
        const ContextualRule& rule = rules_[*r].rule;
        out.emplace_back(Annotation{std::move(chunk), rule.label, rule.confidence, "contextual"});
      } else {
        out.emplace_back(std::nullopt);
      }
    }
    return out;
  }

  /// At most one annotation per chunk; chunks with no firing rule are skipped.
  std::vector<Annotation> annotate(const AnalyzedDocument& doc, std::span<const Chunk> chunks) const {
    std::vector<Annotation> out;
    for (auto& a : annotate_each(doc, chunks))
      if (a) out.push_back(std::move(*a));
    return out;
  }

  /// Every unsuppressed trigger of rule `index` for the chunk.
  std::vector<Trigger> triggers(const AnalyzedDocument& doc, const Chunk& chunk, std::size_t index) const {
    if (!chunk.aligned()) throw AlignmentError("chunk '" + chunk.text + "' is not aligned");
    Context ctx(doc);
    std::vector<Trigger> found;
    rules_.at(index).for_each_trigger(doc, chunk, cache_for(ctx, chunk, index), [&](const Trigger& t) {
      found.push_back(t);
      return false;
    });
    return found;
  }

 private:
  struct Span {
    std::size_t first;
    std::size_t last;
  };

  // Matches of one rule inside one sentence.
  struct Hits {
    std::vector<Span> prefix;
    std::vector<Span> suffix;
    std::vector<Span> exception;
    std::vector<std::pair<std::size_t, std::size_t>> regex;  // char span
    std::vector<RegexAnchor> regex_anchor;
  };

  struct SentenceHits {
    std::vector<Hits> per_rule;
  };

  // Per-call scratch: case-folded and raw token words plus lazily computed
  // sentence hits.
  struct Context {
    explicit Context(const AnalyzedDocument& d) : doc(d), cache(d.sentences().size()) {}
    const AnalyzedDocument& doc;
    std::vector<std::string> folded;
    std::vector<std::string> raw;
    std::vector<std::optional<SentenceHits>> cache;
  };

  struct Compiled {
    explicit Compiled(ContextualRule r) : rule(std::move(r)) {
      const bool fold = !rule.case_sensitive;
      auto fill = [&](PhraseTrie<char>& trie, const std::vector<std::string>& phrases) {
        for (const auto& p : phrases) {
          const auto words = phrase_words(p, fold);
          if (words.empty()) throw ConfigError("rule '" + rule.name + "': empty cue phrase");
          trie.insert(words, 0);
        }
      };
      fill(prefix, rule.prefix_cues);
      fill(suffix, rule.suffix_cues);
      fill(exception, rule.exception_cues);
      boost::regex::flag_type flags = boost::regex::perl;
      if (fold) flags |= boost::regex::icase;
      for (const auto& rc : rule.regex_patterns) {
        try {
          regexes.emplace_back(rc.pattern, flags);
        } catch (const boost::regex_error& e) {
          throw PatternError(rc.pattern, e.position(), e.what());
        }
      }
    }

    Hits find(const AnalyzedDocument& doc, const Sentence& s, std::span<const std::string> words) const {
      Hits h;
      const std::size_t end = s.token_end + 1;
      for (std::size_t i = s.token_begin; i < end; ++i) {
        auto record = [&](std::vector<Span>& into) {
          return [&into, i](PhraseTrie<char>::Match m) { into.push_back(Span{i, i + m.length - 1}); };
        };
        prefix.for_each_prefix(words, i, end, record(h.prefix));
        suffix.for_each_prefix(words, i, end, record(h.suffix));
        exception.for_each_prefix(words, i, end, record(h.exception));
      }
      if (!regexes.empty()) {
        const std::size_t byte_begin = doc.text().byte_offset(s.begin);
        const std::string sentence(doc.text().slice(s.begin, s.end));
        for (std::size_t k = 0; k < regexes.size(); ++k) {
          for (boost::sregex_iterator it(sentence.begin(), sentence.end(), regexes[k]), stop; it != stop; ++it) {
            if (it->length() == 0) continue;
            const auto b = static_cast<std::size_t>(it->position());
            const auto e = b + static_cast<std::size_t>(it->length());
            h.regex.emplace_back(doc.text().index_of_byte(byte_begin + b), doc.text().index_of_byte(byte_begin + e));
            h.regex_anchor.push_back(rule.regex_patterns[k].anchor);
          }
        }
      }
      return h;
    }

    // Calls fn for each unsuppressed trigger; stops early when fn returns true.
    template <class Fn>
    bool for_each_trigger(const AnalyzedDocument& doc, const Chunk& chunk,
                          std::pair<const Hits*, const Hits*> hits, Fn&& fn) const {
      const auto& tokens = doc.tokens();
      const std::size_t tb = *chunk.token_begin;
      const std::size_t te = *chunk.token_end;
      auto char_span = [&](Span s) { return std::pair{tokens[s.first].begin, tokens[s.last].end}; };
      auto suppressed = [&](const Hits& h, std::size_t b, std::size_t e) {
        for (const Span& x : h.exception) {
          const auto [xb, xe] = char_span(x);
          if (xb < e && b < xe) return true;
        }
        return false;
      };

      const Hits& before = *hits.first;
      for (const Span& p : before.prefix) {
        if (p.last >= tb || tb - p.last - 1 >= rule.scope_before) continue;
        const auto [b, e] = char_span(p);
        if (!suppressed(before, b, e) && fn(Trigger{Trigger::Kind::prefix, b, e})) return true;
      }
      const Hits& after = *hits.second;
      for (const Span& p : after.suffix) {
        if (p.first <= te || p.first - te - 1 >= rule.scope_after) continue;
        const auto [b, e] = char_span(p);
        if (!suppressed(after, b, e) && fn(Trigger{Trigger::Kind::suffix, b, e})) return true;
      }
      for (std::size_t k = 0; k < before.regex.size(); ++k) {
        const auto [b, e] = before.regex[k];
        const RegexAnchor anchor = before.regex_anchor[k];
        if (anchor == RegexAnchor::pre && b > chunk.begin) continue;
        if (anchor == RegexAnchor::post && e < chunk.end) continue;
        const std::size_t gap = e <= chunk.begin ? chunk.begin - e : (chunk.end <= b ? b - chunk.end : 0);
        if (gap > rule.scope_after) continue;
        if (!suppressed(before, b, e) && fn(Trigger{Trigger::Kind::regex, b, e})) return true;
      }
      return false;
    }

    ContextualRule rule;
    PhraseTrie<char> prefix;
    PhraseTrie<char> suffix;
    PhraseTrie<char> exception;
    std::vector<boost::regex> regexes;
  };

  std::pair<const Hits*, const Hits*> cache_for(Context& ctx, const Chunk& chunk, std::size_t rule_index) const {
    const SentenceHits& b = sentence_hits(ctx, ctx.doc.sentence_of(*chunk.token_begin));
    const SentenceHits& e = sentence_hits(ctx, ctx.doc.sentence_of(*chunk.token_end));
    return {&b.per_rule[rule_index], &e.per_rule[rule_index]};
  }

  const SentenceHits& sentence_hits(Context& ctx, const Sentence& s) const {
    auto& slot = ctx.cache[s.index];
    if (!slot) {
      SentenceHits sh;
      sh.per_rule.reserve(rules_.size());
      for (const auto& c : rules_) {
        const bool fold = !c.rule.case_sensitive;
        auto& words = fold ? ctx.folded : ctx.raw;
        if (words.empty()) words = token_words(ctx.doc.tokens(), fold);
        sh.per_rule.push_back(c.find(ctx.doc, s, words));
      }
      slot = std::move(sh);
    }
    return *slot;
  }

  std::optional<std::size_t> firing_rule(Context& ctx, const Chunk& chunk) const {
    if (!chunk.aligned()) throw AlignmentError("chunk '" + chunk.text + "' is not aligned");
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      if (rules_[r].for_each_trigger(ctx.doc, chunk, cache_for(ctx, chunk, r),
                                     [](const Trigger&) { return true; }))
        return r;
    }
    return std::nullopt;
  }

  std::vector<Compiled> rules_;
};

namespace detail {

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* key, const std::string& source,
                                            std::size_t line) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw ParseError(source, line, std::string(key) + " must be an array of strings");
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw ParseError(source, line, std::string(key) + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

inline std::size_t scope_field(const nlohmann::json& j, const char* key, std::size_t fallback,
                               const std::string& source, std::size_t line) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw ParseError(source, line, std::string(key) + " must be a non-negative integer");
  return j[key].get<std::size_t>();
}

}  // namespace detail

/// Rule file: one JSON object per line. Only "label" and one cue list are
/// required; scopes default to 9 tokens before and 15 after.
inline std::vector<ContextualRule> parse_rules(std::istream& in, const std::string& source) {
  static const std::vector<std::string> known = {
      "name", "label", "prefix_cues", "suffix_cues", "regex_patterns", "exception_cues",
      "scope_before", "scope_after", "case_sensitive", "priority", "confidence"};
  std::vector<ContextualRule> rules;
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
    if (!j.is_object()) throw ParseError(source, lineno, "expected a JSON object");
    for (const auto& [key, _] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ParseError(source, lineno, "unknown field '" + key + "'");

    ContextualRule rule;
    if (!j.contains("label") || !j["label"].is_string()) throw ParseError(source, lineno, "missing label");
    const auto label = parse_assertion(j["label"].get<std::string>());
    if (!label) throw ParseError(source, lineno, "unknown label '" + j["label"].get<std::string>() + "'");
    rule.label = *label;
    rule.name = j.value("name", source + ":" + std::to_string(lineno));
    rule.prefix_cues = detail::string_list(j, "prefix_cues", source, lineno);
    rule.suffix_cues = detail::string_list(j, "suffix_cues", source, lineno);
    rule.exception_cues = detail::string_list(j, "exception_cues", source, lineno);
    if (j.contains("regex_patterns")) {
      if (!j["regex_patterns"].is_array()) throw ParseError(source, lineno, "regex_patterns must be an array");
      for (const auto& p : j["regex_patterns"]) {
        RegexCue cue;
        if (p.is_string()) {
          cue.pattern = p.get<std::string>();
        } else if (p.is_object() && p.contains("pattern") && p["pattern"].is_string()) {
          cue.pattern = p["pattern"].get<std::string>();
          const std::string anchor = p.value("anchor", "any");
          if (anchor == "pre") cue.anchor = RegexAnchor::pre;
          else if (anchor == "post") cue.anchor = RegexAnchor::post;
          else if (anchor != "any") throw ParseError(source, lineno, "unknown regex anchor '" + anchor + "'");
        } else {
          throw ParseError(source, lineno, "regex pattern must be a string or {\"pattern\", \"anchor\"}");
        }
        rule.regex_patterns.push_back(std::move(cue));
      }
    }
    rule.scope_before = detail::scope_field(j, "scope_before", kDefaultScopeBefore, source, lineno);
    rule.scope_after = detail::scope_field(j, "scope_after", kDefaultScopeAfter, source, lineno);
    if (j.contains("case_sensitive")) {
      if (!j["case_sensitive"].is_boolean()) throw ParseError(source, lineno, "case_sensitive must be a boolean");
      rule.case_sensitive = j["case_sensitive"].get<bool>();
    }
    if (j.contains("priority")) {
      if (!j["priority"].is_number_integer()) throw ParseError(source, lineno, "priority must be an integer");
      rule.priority = j["priority"].get<int>();
    }
    if (j.contains("confidence")) {
      if (!j["confidence"].is_number()) throw ParseError(source, lineno, "confidence must be a number");
      rule.confidence = j["confidence"].get<double>();
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

/// Loads and compiles one or more rule files into a single rule set.
inline RuleSet compile_rules(std::span<const std::string> paths) {
  std::vector<ContextualRule> rules;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open rule file");
    auto more = parse_rules(in, path);
    if (more.empty()) throw ParseError(path, 0, "no rules");
    std::move(more.begin(), more.end(), std::back_inserter(rules));
  }
  if (rules.empty()) throw ParseError("<rules>", 0, "no rules");
  try {
    return RuleSet::compile(std::move(rules));
  } catch (const ConfigError& e) {
    throw ParseError(paths.size() == 1 ? paths[0] : std::string("<rules>"), 0, e.what());
  }
}

inline RuleSet compile_rules(const std::string& path) { return compile_rules(std::span<const std::string>(&path, 1)); }

inline std::vector<Annotation> contextual_annotate(const AnalyzedDocument& doc, std::span<const Chunk> chunks,
                                                   const RuleSet& rules) {
  return rules.annotate(doc, chunks);
}

}  // namespace clinassert

#endif  // CLINASSERT_CONTEXTUAL_HPP
