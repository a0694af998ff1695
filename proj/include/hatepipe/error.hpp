#pragma once

#include <stdexcept>
#include <string>

namespace hatepipe {

// Bad invocation or invalid configuration.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that cannot be used: missing files, malformed rows, precondition
// violations on datasets.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model training, loading or inference failures.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model or topic-model file that cannot be decoded.
class FormatError : public ModelError {
 public:
  enum class Reason { bad_magic, version_mismatch, truncated, checksum_mismatch, malformed };

  FormatError(Reason reason, const std::string& what) : ModelError(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

}  // namespace hatepipe
