#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mathsearch {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : std::runtime_error("parse error at " + std::to_string(position) +
                           ": " + message),
        position_(position),
        detail_(message) {}

  /// Byte offset into the source string.
  std::size_t position() const noexcept { return position_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t position_;
  std::string detail_;
};

class AmbiguousGrid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateDocument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptIndex : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyQueryTuples : public std::runtime_error {
 public:
  EmptyQueryTuples()
      : std::runtime_error("query formula yields no indexable tuples") {}
};

class QueryParseError : public std::runtime_error {
 public:
  struct Fragment {
    std::string latex;
    std::size_t position;
    std::string message;
  };

  QueryParseError(const std::string& message, std::vector<Fragment> fragments)
      : std::runtime_error(message), fragments_(std::move(fragments)) {}

  const std::vector<Fragment>& fragments() const noexcept { return fragments_; }

 private:
  std::vector<Fragment> fragments_;
};

class UnknownSourceDoc : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mathsearch
