#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace porestat {

// Base for everything the library throws on bad input or failed statistics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric argument outside the domain of a formula (non-positive volume,
// probability outside [0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A malformed pore table, fit report or config file. Row is 1-based over data
// rows (0 when the problem is not tied to a row).
class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t row = 0, std::string column = {})
      : Error(what), row_(row), column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// Estimation could not produce a usable tail fit.
class FitError : public Error {
 public:
  using Error::Error;
};

// No threshold candidate satisfied the stability rule.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

// A computation was asked to run without the inputs it needs (e.g. full
// uncertainty propagation without a covariance matrix).
class RefusalError : public Error {
 public:
  using Error::Error;
};

}  // namespace porestat
