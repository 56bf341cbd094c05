#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sigfc {

/// Error categories. The CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorKind { usage, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad arguments: shape mismatches, out-of-range parameters, malformed config.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Bad input data: malformed cells, missing values, duplicate dates, too little history.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Weighted design whose columns are linearly dependent on the weighted support.
class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& what, std::vector<std::size_t> columns)
      : NumericalError(what), columns_(std::move(columns)) {}
  const std::vector<std::size_t>& dependent_columns() const noexcept { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

class NotConvergedError : public NumericalError {
 public:
  NotConvergedError(const std::string& what, double duality_gap)
      : NumericalError(what), gap_(duality_gap) {}
  double duality_gap() const noexcept { return gap_; }

 private:
  double gap_;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}
}  // namespace detail

}  // namespace sigfc
