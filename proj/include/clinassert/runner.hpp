#ifndef CLINASSERT_RUNNER_HPP
#define CLINASSERT_RUNNER_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "clinassert/contextual.hpp"
#include "clinassert/error.hpp"
#include "clinassert/jsonl.hpp"
#include "clinassert/negex.hpp"
#include "clinassert/text.hpp"

namespace clinassert {

using Engine = std::variant<NegexAnnotator, RuleSet>;

/// Documents plus their chunks, grouped per document in corpus order.
struct PreparedCorpus {
  std::vector<Document> documents;
  std::vector<Chunk> chunks;
  std::vector<std::size_t> lines;                      // source line of each chunk
  std::vector<std::vector<std::size_t>> chunks_by_doc; // indices into `chunks`
  std::string chunk_source;

  static PreparedCorpus build(std::vector<Document> docs, std::vector<ChunkRow> rows, std::string chunk_source) {
    PreparedCorpus c;
    c.documents = std::move(docs);
    c.chunk_source = std::move(chunk_source);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t d = 0; d < c.documents.size(); ++d) index.emplace(c.documents[d].doc_id, d);
    c.chunks_by_doc.resize(c.documents.size());
    for (auto& row : rows) {
      auto it = index.find(row.chunk.doc_id);
      if (it == index.end())
        throw ParseError(c.chunk_source, row.line, "unknown doc_id '" + row.chunk.doc_id + "'");
      c.chunks_by_doc[it->second].push_back(c.chunks.size());
      c.chunks.push_back(std::move(row.chunk));
      c.lines.push_back(row.line);
    }
    return c;
  }

  static PreparedCorpus build(const std::vector<Document>& docs, const std::vector<Annotation>& gold) {
    std::vector<ChunkRow> rows;
    for (std::size_t i = 0; i < gold.size(); ++i) rows.push_back(ChunkRow{gold[i].chunk, {}, {}, {}, i + 1});
    return build(docs, std::move(rows), "<memory>");
  }
};

/// Annotates every chunk; the result has one slot per chunk in input order,
/// empty where the engine abstained. Documents are spread over `workers`
/// threads; alignment failures surface as ParseError naming the chunk line.
inline std::vector<std::optional<Annotation>> annotate_corpus(const PreparedCorpus& corpus, const Engine& engine,
                                                              std::size_t workers = 1,
                                                              const Abbreviations& abbrev = Abbreviations::clinical()) {
  std::vector<std::optional<Annotation>> results(corpus.chunks.size());
  std::vector<std::exception_ptr> errors(corpus.documents.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t d = next++; d < corpus.documents.size(); d = next++) {
      try {
        const auto& ids = corpus.chunks_by_doc[d];
        if (ids.empty()) continue;
        const AnalyzedDocument doc(corpus.documents[d], abbrev);
        std::vector<Chunk> chunks;
        chunks.reserve(ids.size());
        for (std::size_t id : ids) {
          try {
            chunks.push_back(doc.align(corpus.chunks[id]));
          } catch (const AlignmentError& e) {
            throw ParseError(corpus.chunk_source, corpus.lines[id], e.what());
          }
        }
        if (const auto* negex = std::get_if<NegexAnnotator>(&engine)) {
          auto out = negex->annotate(doc, chunks);
          for (std::size_t k = 0; k < ids.size(); ++k) results[ids[k]] = std::move(out[k]);
        } else {
          auto out = std::get<RuleSet>(engine).annotate_each(doc, chunks);
          for (std::size_t k = 0; k < ids.size(); ++k) results[ids[k]] = std::move(out[k]);
        }
      } catch (...) {
        errors[d] = std::current_exception();
      }
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, corpus.documents.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace clinassert

#endif  // CLINASSERT_RUNNER_HPP
