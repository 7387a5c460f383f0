#ifndef CATXL_COMMON_HPP
#define CATXL_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace catxl {

using Currency = double;
using PerilId = std::uint32_t;
using GroupId = std::uint32_t;
using YearIndex = std::uint32_t;

// Absolute tolerance for currency comparisons (grid lookups, boundary checks).
inline constexpr double kCurrencyTolerance = 1e-6;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A layer boundary that does not sit on the store's threshold grid.
class GridError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline bool currency_equal(Currency a, Currency b) {
  const double d = a - b;
  return d <= kCurrencyTolerance && d >= -kCurrencyTolerance;
}

}  // namespace catxl

#endif  // CATXL_COMMON_HPP
