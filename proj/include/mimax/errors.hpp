// Error types shared across the library.

#ifndef MIMAX_ERRORS_HPP
#define MIMAX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mimax {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Invalid input values: malformed distributions, bad hyperparameters,
// preconditions violated by the caller.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string &msg) : Error(msg) {}
};

// Malformed files: bad magic strings, truncated payloads, parse failures.
class FormatError : public Error {
  public:
    explicit FormatError(const std::string &msg) : Error(msg) {}
};

// Cross entropy H(p,q) with q(x) = 0 where p(x) > 0.
class InfiniteLossError : public Error {
  public:
    explicit InfiniteLossError(const std::string &msg) : Error(msg) {}
};

}  // namespace mimax

#endif  // MIMAX_ERRORS_HPP
