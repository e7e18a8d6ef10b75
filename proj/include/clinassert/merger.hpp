#ifndef CLINASSERT_MERGER_HPP
#define CLINASSERT_MERGER_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "clinassert/error.hpp"
#include "clinassert/types.hpp"

namespace clinassert {

/// Annotation streams keyed by annotator (or upstream stage) name.
using StreamMap = std::map<std::string, std::vector<Annotation>>;

/// One merge stage. Defaults: overlapping spans are merged, no voting,
/// ordered by confidence, whitelist applied after merging.
struct MergerConfig {
  std::string name = "merger";
  std::vector<std::string> inputs;
  std::optional<std::set<AssertionLabel>> whitelist;
  bool merge_overlapping = true;
  bool majority_voting = false;
  std::vector<std::string> ordering_features = {"confidence"};
  bool apply_filter_before_merge = false;

  void validate() const {
    if (inputs.empty()) throw ConfigError("merger '" + name + "': no inputs");
    if (whitelist && whitelist->empty()) throw ConfigError("merger '" + name + "': empty whitelist");
    for (const auto& f : ordering_features)
      if (f != "confidence") throw ConfigError("merger '" + name + "': unknown ordering feature '" + f + "'");
  }
};

namespace detail {

struct Candidate {
  const Annotation* annotation;
  std::size_t stream;  // position in config.inputs
  std::size_t order;   // position inside its stream
};

// True when a ranks before b: feature values descending, then stream order.
inline bool ranks_before(const Candidate& a, const Candidate& b, const std::vector<std::string>& features) {
  for (const auto& f : features) {
    if (f == "confidence" && a.annotation->confidence != b.annotation->confidence)
      return a.annotation->confidence > b.annotation->confidence;
  }
  if (a.stream != b.stream) return a.stream < b.stream;
  return a.order < b.order;
}

inline const Candidate& select(const std::vector<Candidate>& group, const MergerConfig& config) {
  if (!config.majority_voting) {
    return *std::min_element(group.begin(), group.end(), [&](const Candidate& a, const Candidate& b) {
      return ranks_before(a, b, config.ordering_features);
    });
  }
  std::map<AssertionLabel, std::size_t> votes;
  for (const auto& c : group) ++votes[c.annotation->label];
  std::size_t top = 0;
  for (const auto& [_, n] : votes) top = std::max(top, n);
  const Candidate* best = nullptr;
  for (const auto& c : group) {
    if (votes[c.annotation->label] != top) continue;
    if (!best || ranks_before(c, *best, config.ordering_features)) best = &c;
  }
  return *best;
}

}  // namespace detail

/// Combines streams into one annotation per overlap group. Groups are the
/// transitive closure of character-span overlap (or exact spans when
/// merge_overlapping is off). Output is ordered by first appearance of each
/// document, then by span.
inline std::vector<Annotation> merge(const StreamMap& streams, const MergerConfig& config) {
  config.validate();
  auto allowed = [&](const Annotation& a) { return !config.whitelist || config.whitelist->contains(a.label); };

  std::vector<std::string> doc_order;
  std::unordered_map<std::string, std::vector<detail::Candidate>> by_doc;
  for (std::size_t s = 0; s < config.inputs.size(); ++s) {
    auto it = streams.find(config.inputs[s]);
    if (it == streams.end())
      throw ConfigError("merger '" + config.name + "': unknown stream '" + config.inputs[s] + "'");
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      const Annotation& a = it->second[k];
      if (config.apply_filter_before_merge && !allowed(a)) continue;
      auto [slot, fresh] = by_doc.try_emplace(a.chunk.doc_id);
      if (fresh) doc_order.push_back(a.chunk.doc_id);
      slot->second.push_back(detail::Candidate{&a, s, k});
    }
  }

  std::vector<Annotation> out;
  const std::string source = "merger:" + config.name;
  for (const auto& doc_id : doc_order) {
    auto& cands = by_doc[doc_id];
    std::stable_sort(cands.begin(), cands.end(), [](const detail::Candidate& a, const detail::Candidate& b) {
      const Chunk& x = a.annotation->chunk;
      const Chunk& y = b.annotation->chunk;
      return x.begin != y.begin ? x.begin < y.begin : x.end < y.end;
    });
    std::size_t i = 0;
    while (i < cands.size()) {
      std::vector<detail::Candidate> group{cands[i]};
      std::size_t reach = cands[i].annotation->chunk.end;
      std::size_t j = i + 1;
      for (; j < cands.size(); ++j) {
        const Chunk& c = cands[j].annotation->chunk;
        const bool joins = config.merge_overlapping ? c.begin < reach : c.same_span(cands[i].annotation->chunk);
        if (!joins) break;
        reach = std::max(reach, c.end);
        group.push_back(cands[j]);
      }
      i = j;
      const auto& chosen = detail::select(group, config);
      if (!config.apply_filter_before_merge && !allowed(*chosen.annotation)) continue;
      Annotation merged = *chosen.annotation;
      merged.source = source;
      out.push_back(std::move(merged));
    }
  }
  return out;
}

}  // namespace clinassert

#endif  // CLINASSERT_MERGER_HPP
