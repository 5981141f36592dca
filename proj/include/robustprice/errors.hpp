#ifndef ROBUSTPRICE_ERRORS_HPP_
#define ROBUSTPRICE_ERRORS_HPP_

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace robustprice {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input failed a precondition (bad config value, out-of-range parameter).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A profile with zero total consumption; its MCI is undefined.
class ZeroProfile : public Error {
 public:
  using Error::Error;
};

class EmptyPopulation : public Error {
 public:
  EmptyPopulation() : Error("population is empty") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class InconsistentHorizon : public Error {
 public:
  using Error::Error;
};

class KTooLarge : public Error {
 public:
  KTooLarge(std::size_t k, std::size_t n)
      : Error("k=" + std::to_string(k) + " exceeds population size " +
              std::to_string(n)) {}
};

class DegenerateCenters : public Error {
 public:
  DegenerateCenters() : Error("own and target centers coincide") {}
};

class RecursionDepthExceeded : public Error {
 public:
  using Error::Error;
};

class InstanceTooLarge : public Error {
 public:
  InstanceTooLarge(std::size_t n, std::size_t cap)
      : Error("instance size " + std::to_string(n) + " exceeds oracle cap " +
              std::to_string(cap)) {}
};

// Warning sink. Defaults to stderr; tests install a capturing handler.
using WarningHandler = std::function<void(std::string_view)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace robustprice

#endif  // ROBUSTPRICE_ERRORS_HPP_
