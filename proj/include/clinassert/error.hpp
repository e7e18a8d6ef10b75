#ifndef CLINASSERT_ERROR_HPP
#define CLINASSERT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clinassert {

/// Base of every error raised by the library. Callers that only need to
/// distinguish "bad data or configuration" from programming errors catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chunk's character span cannot be mapped onto the document's tokens.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: empty cue list, unknown stream, cyclic pipeline...
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A malformed input file. `line()` is 1-based, 0 when the whole file is at fault.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// A regex in a rule file failed to compile.
class PatternError : public Error {
 public:
  PatternError(std::string pattern, std::ptrdiff_t position, const std::string& what)
      : Error("invalid pattern '" + pattern + "' at position " + std::to_string(position) + ": " + what),
        pattern_(std::move(pattern)),
        position_(position) {}

  const std::string& pattern() const noexcept { return pattern_; }
  std::ptrdiff_t position() const noexcept { return position_; }

 private:
  std::string pattern_;
  std::ptrdiff_t position_;
};

class UnmappedLabelError : public Error {
 public:
  explicit UnmappedLabelError(std::string label)
      : Error("no mapping for label '" + label + "'"), label_(std::move(label)) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class EmptyEvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace clinassert

#endif  // CLINASSERT_ERROR_HPP
