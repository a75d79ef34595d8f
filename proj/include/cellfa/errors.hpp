#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cellfa {

// Error category; the CLI maps it to the process exit code.
enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(std::string m) : Error(ErrorKind::Usage, std::move(m)) {}
};

class DataError : public Error {
 public:
  explicit DataError(std::string m) : Error(ErrorKind::Data, std::move(m)) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(std::string m) : Error(ErrorKind::Numeric, std::move(m)) {}
};

class EmptyFileError : public DataError {
 public:
  explicit EmptyFileError(std::string m) : DataError(std::move(m)) {}
};

class MissingColumnError : public DataError {
 public:
  explicit MissingColumnError(std::string m) : DataError(std::move(m)) {}
};

// Thrown when the malformed-row share exceeds the configured threshold.
class RejectRateError : public DataError {
 public:
  RejectRateError(std::string m, std::size_t rejected, std::size_t total)
      : DataError(std::move(m)), rejected(rejected), total(total) {}
  std::size_t rejected;
  std::size_t total;
};

class DuplicateSiteIdError : public DataError {
 public:
  explicit DuplicateSiteIdError(std::string m) : DataError(std::move(m)) {}
};

class UnknownDistrictError : public DataError {
 public:
  explicit UnknownDistrictError(std::string m) : DataError(std::move(m)) {}
};

class EmptyDatasetError : public DataError {
 public:
  explicit EmptyDatasetError(std::string m) : DataError(std::move(m)) {}
};

class NoEligibleCellsError : public DataError {
 public:
  explicit NoEligibleCellsError(std::string m) : DataError(std::move(m)) {}
};

class OutOfRangeError : public DataError {
 public:
  explicit OutOfRangeError(std::string m) : DataError(std::move(m)) {}
};

class ZeroVarianceError : public NumericError {
 public:
  ZeroVarianceError(std::string m, std::vector<int> slots)
      : NumericError(std::move(m)), slots(std::move(slots)) {}
  std::vector<int> slots;  // offending variable (slot) indices
};

class ConvergenceError : public NumericError {
 public:
  explicit ConvergenceError(std::string m) : NumericError(std::move(m)) {}
};

class MissingCoordinatesError : public DataError {
 public:
  MissingCoordinatesError(std::string m, std::vector<std::string> cells)
      : DataError(std::move(m)), cells(std::move(cells)) {}
  std::vector<std::string> cells;
};

class InvalidProfileError : public DataError {
 public:
  explicit InvalidProfileError(std::string m) : DataError(std::move(m)) {}
};

class IoError : public DataError {
 public:
  explicit IoError(std::string m) : DataError(std::move(m)) {}
};

}  // namespace cellfa
