#pragma once

#include <stdexcept>
#include <string>

namespace qfi {

// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Bad arguments, malformed inputs, broken preconditions. The CLI maps this
// family to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Requested problem size exceeds what the dense simulator can hold.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A data file failed to parse or violated its schema.
class IngestionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A label vector with a single class; nothing can be trained from it.
class DegenerateLabelsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A feature column without enough distinct values to explain.
class DegenerateFeatureError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A score vector whose floored sum is zero; no simplex normalization exists.
class DegenerateNormalizationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Failures after validation passed. The CLI maps this family to exit code 2.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

// The optimizer hit a non-finite loss and stopped.
class OptimizerAbort : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

// Filesystem trouble while reading or writing an artifact.
class IoError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace qfi
