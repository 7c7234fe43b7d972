#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hmegen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (XML, trace data, LaTeX). Carries the byte offset
/// at which the problem was detected.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed input whose structure is inconsistent (dangling trace
/// references, cyclic trees, relation combinations with no LaTeX form).
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Ground-truth structure and symbol segmentation do not line up.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// A transform parameter outside its admissible domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmegen
