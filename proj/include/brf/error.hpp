#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace brf {

// Base of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document. line() is 1-based, 0 when no line applies.
class parse_error : public error {
 public:
  explicit parse_error(const std::string& what, std::size_t line = 0)
      : error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that uses a feature this library does not handle
// (sparse ARFF, string attributes, more than two classes in training, ...).
class unsupported_error : public error {
 public:
  using error::error;
};

class imputation_error : public error {
 public:
  using error::error;
};

// Precondition violated by a caller-supplied argument.
class argument_error : public error {
 public:
  using error::error;
};

// Instance or dataset does not match the schema a model was trained on.
class schema_error : public error {
 public:
  using error::error;
};

// Serialized model could not be read.
class model_error : public error {
 public:
  using error::error;
};

class version_error : public model_error {
 public:
  using model_error::model_error;
};

}  // namespace brf
