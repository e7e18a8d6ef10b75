#ifndef CLINASSERT_TESTS_SUPPORT_HPP
#define CLINASSERT_TESTS_SUPPORT_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "clinassert/clinassert.hpp"

namespace clinassert::testing {

/// Uniform pick in [0, n) from raw engine output, stable across platforms.
inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

/// Builds a document from words separated by single spaces and returns the
/// chunk covering words [first, last].
struct Built {
  Document doc;
  std::vector<std::size_t> word_begin;
  std::vector<std::size_t> word_end;

  Chunk chunk(std::size_t first, std::size_t last) const {
    return Chunk{doc.doc_id, std::string(Utf8Text(doc.text).slice(word_begin[first], word_end[last])),
                 word_begin[first], word_end[last], {}, {}};
  }
};

inline Built build_doc(const std::vector<std::string>& words, std::string id = "doc") {
  Built b;
  b.doc.doc_id = std::move(id);
  for (const auto& w : words) {
    if (!b.doc.text.empty()) b.doc.text += ' ';
    b.word_begin.push_back(utf8_length(b.doc.text));
    b.doc.text += w;
    b.word_end.push_back(utf8_length(b.doc.text));
  }
  return b;
}

inline std::string path_in_fixtures(std::string_view rel) { return std::string(CLINASSERT_FIXTURES) + "/" + std::string(rel); }
inline std::string path_in_data(std::string_view rel) { return std::string(CLINASSERT_DEFAULT_DATA_DIR) + "/" + std::string(rel); }

}  // namespace clinassert::testing

#endif  // CLINASSERT_TESTS_SUPPORT_HPP
