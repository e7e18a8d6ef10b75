#ifndef CLINASSERT_TYPES_HPP
#define CLINASSERT_TYPES_HPP

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "clinassert/error.hpp"
#include "clinassert/unicode.hpp"

namespace clinassert {

struct Document {
  std::string doc_id;
  std::string text;
};

/// Offsets are Unicode scalar-value indices, end exclusive.
struct Token {
  std::size_t index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string surface;

  bool operator==(const Token&) const = default;
};

/// token_end is inclusive; begin/end are character offsets (end exclusive).
struct Sentence {
  std::size_t index = 0;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Sentence&) const = default;
};

struct Chunk {
  std::string doc_id;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::optional<std::size_t> token_begin;
  std::optional<std::size_t> token_end;

  bool aligned() const noexcept { return token_begin.has_value() && token_end.has_value(); }
  bool overlaps(const Chunk& other) const noexcept {
    return doc_id == other.doc_id && begin < other.end && other.begin < end;
  }
  bool same_span(const Chunk& other) const noexcept {
    return doc_id == other.doc_id && begin == other.begin && end == other.end;
  }

  bool operator==(const Chunk&) const = default;
};

/// The six i2b2 assertion categories.
enum class Assertion {
  present,
  absent,
  possible,
  conditional,
  hypothetical,
  associated_with_someone_else,
};

inline constexpr std::array<Assertion, 6> kAllAssertions = {
    Assertion::present,     Assertion::absent,       Assertion::possible,
    Assertion::conditional, Assertion::hypothetical, Assertion::associated_with_someone_else,
};

constexpr std::string_view to_string(Assertion a) noexcept {
  switch (a) {
    case Assertion::present: return "present";
    case Assertion::absent: return "absent";
    case Assertion::possible: return "possible";
    case Assertion::conditional: return "conditional";
    case Assertion::hypothetical: return "hypothetical";
    case Assertion::associated_with_someone_else: return "associated_with_someone_else";
  }
  return "";
}

/// Case-insensitive lookup of a canonical category name.
inline std::optional<Assertion> parse_assertion(std::string_view name) {
  const std::string folded = fold_case(name);
  for (Assertion a : kAllAssertions)
    if (folded == to_string(a)) return a;
  return std::nullopt;
}

/// Either one of the canonical categories or a raw label from an external
/// system that has not been mapped yet ("NEGATION", "LOW_CONFIDENCE", ...).
class AssertionLabel {
 public:
  AssertionLabel() : AssertionLabel(Assertion::present) {}
  AssertionLabel(Assertion a) : name_(to_string(a)), canonical_(a) {}  // NOLINT(implicit)

  /// Canonical names are recognized case-insensitively and stored folded;
  /// anything else is kept verbatim as a raw label.
  static AssertionLabel from_string(std::string_view name) {
    AssertionLabel label;
    label.canonical_ = parse_assertion(name);
    label.name_ = label.canonical_ ? std::string(to_string(*label.canonical_)) : std::string(name);
    return label;
  }

  const std::string& name() const noexcept { return name_; }
  bool is_canonical() const noexcept { return canonical_.has_value(); }
  std::optional<Assertion> canonical() const noexcept { return canonical_; }

  bool operator==(const AssertionLabel& o) const noexcept { return name_ == o.name_; }
  bool operator==(Assertion a) const noexcept { return canonical_ == a; }
  auto operator<=>(const AssertionLabel& o) const noexcept { return name_ <=> o.name_; }

 private:
  std::string name_;
  std::optional<Assertion> canonical_;
};

struct Annotation {
  Chunk chunk;
  AssertionLabel label;
  double confidence = 1.0;
  std::string source;

  bool operator==(const Annotation& o) const {
    return chunk == o.chunk && label == o.label && confidence == o.confidence && source == o.source;
  }
};

inline Annotation make_annotation(Chunk chunk, AssertionLabel label, double confidence,
                                  std::string source) {
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw Error("annotation confidence " + std::to_string(confidence) + " outside [0,1]");
  if (source.empty()) throw Error("annotation source must be nonempty");
  return Annotation{std::move(chunk), std::move(label), confidence, std::move(source)};
}

}  // namespace clinassert

#endif  // CLINASSERT_TYPES_HPP
