#ifndef CLINASSERT_UNICODE_HPP
#define CLINASSERT_UNICODE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clinassert/error.hpp"

namespace clinassert {

/// UTF-8 text indexed by Unicode scalar value. All public offsets in the
/// library are scalar-value indices; this class converts them to bytes.
class Utf8Text {
 public:
  Utf8Text() { byte_offsets_.push_back(0); }

  explicit Utf8Text(std::string bytes) : bytes_(std::move(bytes)) {
    std::string_view view = bytes_;
    code_points_.reserve(view.size());
    byte_offsets_.reserve(view.size() + 1);
    std::size_t i = 0;
    while (i < view.size()) {
      byte_offsets_.push_back(i);
      code_points_.push_back(decode(view, i));
    }
    byte_offsets_.push_back(view.size());
  }

  std::size_t size() const noexcept { return code_points_.size(); }
  bool empty() const noexcept { return code_points_.empty(); }
  char32_t operator[](std::size_t i) const { return code_points_[i]; }
  const std::string& bytes() const noexcept { return bytes_; }

  std::size_t byte_offset(std::size_t cp) const { return byte_offsets_.at(cp); }

  /// Scalar index of the code point starting at `byte`; a byte inside a
  /// multi-byte sequence maps to the following code point.
  std::size_t index_of_byte(std::size_t byte) const {
    auto it = std::lower_bound(byte_offsets_.begin(), byte_offsets_.end(), byte);
    return static_cast<std::size_t>(it - byte_offsets_.begin());
  }

  std::string_view slice(std::size_t begin, std::size_t end) const {
    const std::size_t b = byte_offsets_.at(begin);
    return std::string_view(bytes_).substr(b, byte_offsets_.at(end) - b);
  }

 private:
  static char32_t decode(std::string_view s, std::size_t& i) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      ++i;
      return lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    } else {
      throw Error("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size()) throw Error("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80) throw Error("invalid UTF-8 continuation at offset " + std::to_string(i + k));
      cp = (cp << 6) | (c & 0x3F);
    }
    static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      throw Error("invalid UTF-8 scalar value at offset " + std::to_string(i));
    i += len;
    return cp;
  }

  std::string bytes_;
  std::vector<char32_t> code_points_;
  std::vector<std::size_t> byte_offsets_;
};

inline std::size_t utf8_length(std::string_view s) { return Utf8Text(std::string(s)).size(); }

inline bool is_space(char32_t c) noexcept {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0x00A0 || c == 0x2028 || c == 0x2029 || c == 0x3000;
}

/// ASCII punctuation only; non-ASCII symbols stay inside word tokens.
inline bool is_punct(char32_t c) noexcept {
  return (c >= U'!' && c <= U'/') || (c >= U':' && c <= U'@') || (c >= U'[' && c <= U'`') ||
         (c >= U'{' && c <= U'~');
}

inline bool is_upper(char32_t c) noexcept {
  return (c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7);
}

/// Case fold ASCII letters; other bytes pass through unchanged.
inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

/// Collapse whitespace runs to one space and trim both ends.
inline std::string normalize_space(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace clinassert

#endif  // CLINASSERT_UNICODE_HPP
