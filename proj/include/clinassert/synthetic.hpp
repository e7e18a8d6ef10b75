#ifndef CLINASSERT_SYNTHETIC_HPP
#define CLINASSERT_SYNTHETIC_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "clinassert/types.hpp"
#include "clinassert/unicode.hpp"

namespace clinassert {

/// Generated corpus with one labeled chunk per sentence.
struct SyntheticCorpus {
  std::vector<Document> documents;
  std::vector<Annotation> gold;
};

namespace detail {

struct SentenceTemplate {
  std::string_view before;
  std::string_view after;
  Assertion label;
};

// Clinical sentence frames; the entity goes between `before` and `after`.
inline constexpr std::array<SentenceTemplate, 12> kTemplates = {{
    {"There was no evidence of ", " during the hospital stay.", Assertion::absent},
    {"The patient denies ", " but reports fatigue.", Assertion::absent},
    {"Patient reports ", " since yesterday.", Assertion::present},
    {"Overnight, the patient developed ", ", dropping to the 80 's.", Assertion::present},
    {"He gets ", " with one flight of stairs.", Assertion::conditional},
    {"Small stroke, nearly recovered, likely ", ".", Assertion::possible},
    {"Findings are concerning for ", " on the chest film.", Assertion::possible},
    {"Mother suffered ", " in her 50 's, died at age 59.", Assertion::associated_with_someone_else},
    {"Family history of ", " in his father.", Assertion::associated_with_someone_else},
    {"Hydrocodone 5 mg with Tylenol, one to two tablets every four hours p.r.n. ", ".", Assertion::hypothetical},
    {"She was started on heparin secondary to h/o ", ".", Assertion::present},
    {"No signs of ", " were seen on exam.", Assertion::absent},
}};

inline constexpr std::array<std::string_view, 12> kEntities = {
    "pain",     "fever",       "cough", "chest pain", "shortness of breath", "nausea",
    "diarrhea", "rash",        "MI",    "pneumonia",  "bilateral DVTs",      "headache",
};

}  // namespace detail

/// Deterministic for a given seed on every platform: only raw mt19937_64
/// output is used, never a standard distribution.
inline SyntheticCorpus make_synthetic_corpus(std::size_t chunks, std::size_t sentences_per_doc = 5,
                                             std::uint64_t seed = 20240501) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  SyntheticCorpus corpus;
  std::size_t made = 0;
  while (made < chunks) {
    Document doc{"synthetic-" + std::to_string(corpus.documents.size() + 1), ""};
    for (std::size_t s = 0; s < sentences_per_doc && made < chunks; ++s, ++made) {
      const auto& t = detail::kTemplates[pick(detail::kTemplates.size())];
      const std::string_view entity = detail::kEntities[pick(detail::kEntities.size())];
      if (!doc.text.empty()) doc.text += ' ';
      doc.text += t.before;
      const std::size_t begin = utf8_length(doc.text);
      doc.text += entity;
      const std::size_t end = utf8_length(doc.text);
      doc.text += t.after;
      corpus.gold.push_back(Annotation{Chunk{doc.doc_id, std::string(entity), begin, end, {}, {}}, t.label, 1.0, "gold"});
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace clinassert

#endif  // CLINASSERT_SYNTHETIC_HPP
