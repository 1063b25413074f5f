#pragma once

#include <stdexcept>
#include <string>

namespace merkit {

enum class ErrorKind {
  kDimension,
  kData,
  kParameter,
  kSingularity,
  kParse,
  kFixture,
  kCapacity,
  kTraining,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the toolkit. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error(ErrorKind::kDimension, m) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error(ErrorKind::kData, m) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& m) : Error(ErrorKind::kParameter, m) {}
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& m, double min_eigenvalue)
      : Error(ErrorKind::kSingularity, m), min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& m, std::size_t row)
      : Error(ErrorKind::kParse, m), row_(row) {}

  /// 1-based line number in the source file, 0 when not applicable.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class FixtureError : public Error {
 public:
  explicit FixtureError(const std::string& m) : Error(ErrorKind::kFixture, m) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& m) : Error(ErrorKind::kCapacity, m) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& m) : Error(ErrorKind::kTraining, m) {}
};

}  // namespace merkit
