#ifndef CLINASSERT_PHRASE_TRIE_HPP
#define CLINASSERT_PHRASE_TRIE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "clinassert/text.hpp"

namespace clinassert {

/// Token-level trie over multi-word phrases. Keys are token surfaces,
/// already case-folded by the caller when matching is case-insensitive.
template <class Payload>
class PhraseTrie {
 public:
  struct Match {
    std::size_t length;
    const Payload* payload;
  };

  PhraseTrie() : nodes_(1) {}

  /// Returns false, leaving the trie unchanged, when the phrase already exists.
  bool insert(std::span<const std::string> words, Payload payload) {
    if (words.empty()) return false;
    std::size_t node = 0;
    for (const auto& w : words) {
      auto it = nodes_[node].next.find(w);
      if (it == nodes_[node].next.end()) {
        nodes_.emplace_back();
        it = nodes_[node].next.emplace(w, nodes_.size() - 1).first;
      }
      node = it->second;
    }
    if (nodes_[node].value) return false;
    nodes_[node].value = std::move(payload);
    ++size_;
    return true;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  /// Every phrase starting at `pos` and ending before `limit`, shortest first.
  template <class Fn>
  void for_each_prefix(std::span<const std::string> words, std::size_t pos, std::size_t limit,
                       Fn&& fn) const {
    std::size_t node = 0;
    for (std::size_t i = pos; i < limit; ++i) {
      auto it = nodes_[node].next.find(words[i]);
      if (it == nodes_[node].next.end()) return;
      node = it->second;
      if (nodes_[node].value) fn(Match{i - pos + 1, &*nodes_[node].value});
    }
  }

  std::optional<Match> longest(std::span<const std::string> words, std::size_t pos,
                               std::size_t limit) const {
    std::optional<Match> best;
    for_each_prefix(words, pos, limit, [&](Match m) { best = m; });
    return best;
  }

 private:
  struct Node {
    std::unordered_map<std::string, std::size_t> next;
    std::optional<Payload> value;
  };
  std::vector<Node> nodes_;
  std::size_t size_ = 0;
};

/// Splits a cue phrase with the document tokenizer so that cue tokens line
/// up with document tokens ("no evidence of" -> 3 words).
inline std::vector<std::string> phrase_words(std::string_view phrase, bool fold) {
  std::vector<std::string> words;
  for (auto& t : tokenize(Utf8Text(std::string(phrase))))
    words.push_back(fold ? fold_case(t.surface) : std::move(t.surface));
  return words;
}

inline std::vector<std::string> token_words(std::span<const Token> tokens, bool fold) {
  std::vector<std::string> words;
  words.reserve(tokens.size());
  for (const auto& t : tokens) words.push_back(fold ? fold_case(t.surface) : t.surface);
  return words;
}

}  // namespace clinassert

#endif  // CLINASSERT_PHRASE_TRIE_HPP
