#ifndef MATFDP_ERRORS_HPP
#define MATFDP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace matfdp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

class NotPsd : public Error {
 public:
  using Error::Error;
};

// A cell (or diagonal entry) whose variance estimate is zero or negative.
class DegenerateVariance : public Error {
 public:
  DegenerateVariance(std::size_t row, std::size_t col)
      : Error("degenerate variance at (" + std::to_string(row) + ", " +
              std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class NonPositiveEigenvalue : public Error {
 public:
  using Error::Error;
};

class InvalidFactorCount : public Error {
 public:
  using Error::Error;
};

class InvalidDataset : public Error {
 public:
  using Error::Error;
};

// An output file or directory could not be written.
class OutputError : public Error {
 public:
  using Error::Error;
};

}  // namespace matfdp

#endif  // MATFDP_ERRORS_HPP
