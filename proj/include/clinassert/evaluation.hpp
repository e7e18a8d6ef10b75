#ifndef CLINASSERT_EVALUATION_HPP
#define CLINASSERT_EVALUATION_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "clinassert/error.hpp"
#include "clinassert/types.hpp"

namespace clinassert {

/// Exact arbitrary-precision rational; metrics are only rounded for display.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// ---------------------------------------------------------------------------
// Label mapping

enum class UnmappedPolicy { drop, error };

/// Raw external label -> canonical category. Lookups are case-insensitive;
/// canonical names not listed in the map pass through unchanged.
class LabelMap {
 public:
  explicit LabelMap(UnmappedPolicy policy = UnmappedPolicy::error) : policy_(policy) {}

  void add(std::string_view raw, Assertion target) {
    const std::string key = fold_case(raw);
    auto [it, fresh] = entries_.emplace(key, target);
    if (!fresh && it->second != target)
      throw ConfigError("label map: '" + std::string(raw) + "' maps to both " + std::string(to_string(it->second)) +
                        " and " + std::string(to_string(target)));
    if (!fresh) return;
    try {
      check_fixed_points();
    } catch (...) {
      entries_.erase(it);
      throw;
    }
  }

  /// {"RAW": "canonical", ...}
  static LabelMap from_json(const nlohmann::json& j, UnmappedPolicy policy) {
    if (!j.is_object()) throw ConfigError("label map must be a JSON object");
    LabelMap map(policy);
    for (const auto& [raw, target] : j.items()) {
      if (!target.is_string()) throw ConfigError("label map: value for '" + raw + "' must be a string");
      const auto canonical = parse_assertion(target.get<std::string>());
      if (!canonical)
        throw ConfigError("label map: '" + target.get<std::string>() + "' is not a canonical assertion label");
      map.add(raw, *canonical);
    }
    return map;
  }

  static LabelMap load(const std::string& path, UnmappedPolicy policy) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open label map");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path, 0, e.what());
    }
    try {
      return from_json(j, policy);
    } catch (const ConfigError& e) {
      throw ParseError(path, 0, e.what());
    }
  }

  std::optional<Assertion> lookup(std::string_view raw) const {
    if (auto it = entries_.find(fold_case(raw)); it != entries_.end()) return it->second;
    return parse_assertion(raw);
  }

  UnmappedPolicy policy() const noexcept { return policy_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  // A target that is itself a key must map to itself, so mapping twice
  // equals mapping once.
  void check_fixed_points() const {
    for (const auto& [raw, target] : entries_) {
      auto it = entries_.find(std::string(to_string(target)));
      if (it != entries_.end() && it->second != target)
        throw ConfigError("label map: target '" + std::string(to_string(target)) + "' is remapped to " +
                          std::string(to_string(it->second)));
    }
  }

  std::map<std::string, Assertion> entries_;
  UnmappedPolicy policy_;
};

inline std::vector<Annotation> map_labels(std::span<const Annotation> annotations, const LabelMap& map) {
  std::vector<Annotation> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) {
    if (auto canonical = map.lookup(a.label.name())) {
      Annotation mapped = a;
      mapped.label = *canonical;
      out.push_back(std::move(mapped));
    } else if (map.policy() == UnmappedPolicy::error) {
      throw UnmappedLabelError(a.label.name());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Span matching

enum class MatchCategory { full, partial, none };

constexpr std::string_view to_string(MatchCategory c) noexcept {
  switch (c) {
    case MatchCategory::full: return "full";
    case MatchCategory::partial: return "partial";
    case MatchCategory::none: return "none";
  }
  return "";
}

struct MatchedPair {
  Annotation gold;
  std::optional<Annotation> pred;
  MatchCategory category = MatchCategory::none;
};

inline std::size_t span_intersection(const Chunk& a, const Chunk& b) {
  if (a.doc_id != b.doc_id) return 0;
  const std::size_t lo = std::max(a.begin, b.begin);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

/// One result per gold row, in gold order. Overlapping (gold, pred) pairs
/// are assigned greedily by intersection size (exact spans first on ties,
/// then leftmost prediction); each prediction is used at most once. A gold
/// row whose overlapping predictions were all taken counts as NONE.
inline std::vector<MatchedPair> match_spans(std::span<const Annotation> gold, std::span<const Annotation> pred) {
  std::unordered_map<std::string, std::vector<std::size_t>> pred_by_doc;
  for (std::size_t p = 0; p < pred.size(); ++p) pred_by_doc[pred[p].chunk.doc_id].push_back(p);
  for (auto& [_, idx] : pred_by_doc)
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return pred[a].chunk.begin != pred[b].chunk.begin ? pred[a].chunk.begin < pred[b].chunk.begin : a < b;
    });

  struct Pair {
    std::size_t inter;
    bool exact;
    std::size_t g;
    std::size_t p;
  };
  std::vector<Pair> pairs;
  for (std::size_t g = 0; g < gold.size(); ++g) {
    const Chunk& gc = gold[g].chunk;
    auto it = pred_by_doc.find(gc.doc_id);
    if (it == pred_by_doc.end()) continue;
    for (std::size_t p : it->second) {
      const Chunk& pc = pred[p].chunk;
      if (pc.begin >= gc.end) break;
      if (const std::size_t inter = span_intersection(gc, pc))
        pairs.push_back(Pair{inter, gc.begin == pc.begin && gc.end == pc.end, g, p});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (a.inter != b.inter) return a.inter > b.inter;
    if (a.exact != b.exact) return a.exact;
    if (pred[a.p].chunk.begin != pred[b.p].chunk.begin) return pred[a.p].chunk.begin < pred[b.p].chunk.begin;
    if (gold[a.g].chunk.begin != gold[b.g].chunk.begin) return gold[a.g].chunk.begin < gold[b.g].chunk.begin;
    return a.g != b.g ? a.g < b.g : a.p < b.p;
  });

  std::vector<std::optional<std::size_t>> assigned(gold.size());
  std::vector<bool> used(pred.size(), false);
  for (const Pair& x : pairs) {
    if (assigned[x.g] || used[x.p]) continue;
    assigned[x.g] = x.p;
    used[x.p] = true;
  }

  std::vector<MatchedPair> out;
  out.reserve(gold.size());
  for (std::size_t g = 0; g < gold.size(); ++g) {
    MatchedPair m{gold[g], std::nullopt, MatchCategory::none};
    if (assigned[g]) {
      m.pred = pred[*assigned[g]];
      m.category = m.pred->chunk.begin == gold[g].chunk.begin && m.pred->chunk.end == gold[g].chunk.end
                       ? MatchCategory::full
                       : MatchCategory::partial;
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

struct ClassScore {
  Rational precision;
  Rational recall;
  Rational f1;
  std::size_t support = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct MatchCounts {
  std::size_t full = 0;
  std::size_t partial = 0;
  std::size_t none = 0;
  std::size_t predicted_rows = 0;
  std::size_t total_rows = 0;
};

struct LatencyStats {
  double mean_seconds_per_100 = 0.0;
  double stddev_seconds_per_100 = 0.0;
  std::size_t rows = 0;
  std::size_t repetitions = 0;
  bool parallel = false;
  std::string hardware;
};

struct EvalReport {
  std::vector<Assertion> classes;
  bool include_unmatched_as_miss = false;
  std::map<Assertion, ClassScore> per_class;
  Rational weighted_f1;
  MatchCounts match_counts;
  std::optional<LatencyStats> latency;
};

/// Per-class precision/recall/F1 over matched pairs. A pair counts for a
/// class when its gold or predicted label is that class; NONE rows count as
/// misses only when include_unmatched_as_miss is set. The weighted F1 is
/// support-weighted over `classes`.
inline EvalReport score(std::span<const MatchedPair> pairs, const std::set<Assertion>& classes,
                        bool include_unmatched_as_miss) {
  EvalReport report;
  report.classes.assign(classes.begin(), classes.end());
  report.include_unmatched_as_miss = include_unmatched_as_miss;
  for (Assertion c : classes) report.per_class[c] = ClassScore{};
  auto& counts = report.match_counts;

  for (const auto& m : pairs) {
    const auto g = m.gold.label.canonical();
    if (!g) throw UnmappedLabelError(m.gold.label.name());
    const bool gold_in = classes.contains(*g);
    if (!m.pred) {
      if (!gold_in) continue;
      ++counts.none;
      ++counts.total_rows;
      if (include_unmatched_as_miss) {
        ++report.per_class[*g].fn;
        ++report.per_class[*g].support;
      }
      continue;
    }
    const auto p = m.pred->label.canonical();
    const bool pred_in = p && classes.contains(*p);
    if (gold_in) {
      ++counts.total_rows;
      ++(m.category == MatchCategory::full ? counts.full : counts.partial);
      ++counts.predicted_rows;
      ++report.per_class[*g].support;
    }
    if (gold_in && p == g) {
      ++report.per_class[*g].tp;
      continue;
    }
    if (gold_in) ++report.per_class[*g].fn;
    if (pred_in) ++report.per_class[*p].fp;
  }

  if (counts.total_rows == 0) throw EmptyEvalError("no gold rows in the evaluated classes");
  std::size_t total_support = 0;
  Rational weighted_sum = 0;
  for (auto& [c, s] : report.per_class) {
    const Rational tp(s.tp);
    s.precision = s.tp + s.fp ? tp / (s.tp + s.fp) : Rational(0);
    s.recall = s.tp + s.fn ? tp / (s.tp + s.fn) : Rational(0);
    const Rational pr_sum = s.precision + s.recall;
    s.f1 = pr_sum != 0 ? Rational(2) * s.precision * s.recall / pr_sum : Rational(0);
    total_support += s.support;
    weighted_sum += s.f1 * s.support;
  }
  if (total_support == 0) throw EmptyEvalError("no matched gold rows in the evaluated classes");
  report.weighted_f1 = weighted_sum / total_support;
  return report;
}

struct EvalOptions {
  std::optional<std::set<Assertion>> classes;  // default: labels the system predicts
  bool include_unmatched_as_miss = false;
  std::optional<LabelMap> label_map;
};

/// map_labels + match_spans + score. predicted_rows reports every prediction
/// whose label is an evaluated class, matched or not.
inline EvalReport evaluate(std::span<const Annotation> gold_in, std::span<const Annotation> pred_in,
                           const EvalOptions& options) {
  std::vector<Annotation> gold(gold_in.begin(), gold_in.end());
  std::vector<Annotation> pred(pred_in.begin(), pred_in.end());
  if (options.label_map) {
    gold = map_labels(gold, *options.label_map);
    pred = map_labels(pred, *options.label_map);
  }
  for (const auto& g : gold)
    if (!g.label.is_canonical()) throw UnmappedLabelError(g.label.name());

  std::set<Assertion> classes;
  if (options.classes) {
    classes = *options.classes;
  } else {
    for (const auto& p : pred)
      if (auto c = p.label.canonical()) classes.insert(*c);
  }
  const auto pairs = match_spans(gold, pred);
  EvalReport report = score(pairs, classes, options.include_unmatched_as_miss);
  report.match_counts.predicted_rows = static_cast<std::size_t>(std::count_if(pred.begin(), pred.end(), [&](const Annotation& p) {
    return p.label.canonical() && classes.contains(*p.label.canonical());
  }));
  return report;
}

// ---------------------------------------------------------------------------
// Report output

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["classes"] = nlohmann::ordered_json::array();
  for (Assertion c : r.classes) j["classes"].push_back(std::string(to_string(c)));
  j["include_unmatched_as_miss"] = r.include_unmatched_as_miss;
  auto& per = j["per_class"] = nlohmann::ordered_json::object();
  for (const auto& [c, s] : r.per_class) {
    per[std::string(to_string(c))] = {
        {"precision", to_double(s.precision)}, {"recall", to_double(s.recall)}, {"f1", to_double(s.f1)},
        {"support", s.support},                {"tp", s.tp},                    {"fp", s.fp},
        {"fn", s.fn},
    };
  }
  j["weighted_f1"] = to_double(r.weighted_f1);
  const auto& m = r.match_counts;
  j["match_counts"] = {{"full", m.full},
                       {"partial", m.partial},
                       {"none", m.none},
                       {"predicted_rows", m.predicted_rows},
                       {"total_rows", m.total_rows}};
  if (r.latency) {
    j["latency"] = {{"mean_seconds_per_100_rows", r.latency->mean_seconds_per_100},
                    {"stddev_seconds_per_100_rows", r.latency->stddev_seconds_per_100},
                    {"rows", r.latency->rows},
                    {"repetitions", r.latency->repetitions},
                    {"parallel", r.latency->parallel},
                    {"hardware", r.latency->hardware}};
  }
  return j;
}

inline std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

/// Human-readable metrics table followed by the match accounting.
inline void print_report(std::ostream& os, const EvalReport& r) {
  os << std::left << std::setw(30) << "class" << std::right << std::setw(10) << "precision" << std::setw(8)
     << "recall" << std::setw(8) << "f1" << std::setw(9) << "support" << '\n';
  std::size_t support = 0;
  for (const auto& [c, s] : r.per_class) {
    os << std::left << std::setw(30) << to_string(c) << std::right << std::setw(10) << fixed3(to_double(s.precision))
       << std::setw(8) << fixed3(to_double(s.recall)) << std::setw(8) << fixed3(to_double(s.f1)) << std::setw(9)
       << s.support << '\n';
    support += s.support;
  }
  os << std::left << std::setw(30) << "weighted avg" << std::right << std::setw(18) << "" << std::setw(8)
     << fixed3(to_double(r.weighted_f1)) << std::setw(9) << support << "\n\n";

  const auto& m = r.match_counts;
  auto pct = [&](std::size_t n) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << (m.total_rows ? 100.0 * n / m.total_rows : 0.0) << '%';
    return s.str();
  };
  os << std::left << std::setw(16) << "match" << std::right << std::setw(8) << "rows" << std::setw(10) << "%" << '\n';
  os << std::left << std::setw(16) << "full" << std::right << std::setw(8) << m.full << std::setw(10) << pct(m.full) << '\n';
  os << std::left << std::setw(16) << "partial" << std::right << std::setw(8) << m.partial << std::setw(10)
     << pct(m.partial) << '\n';
  os << std::left << std::setw(16) << "none" << std::right << std::setw(8) << m.none << std::setw(10) << pct(m.none)
     << '\n';
  os << "predicted rows: " << m.predicted_rows << "  total rows: " << m.total_rows << '\n';
}

}  // namespace clinassert

#endif  // CLINASSERT_EVALUATION_HPP
