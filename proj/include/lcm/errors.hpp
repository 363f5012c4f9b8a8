#ifndef LCM_ERRORS_HPP
#define LCM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lcm {

/// Bad arguments, malformed files, out-of-range values. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid numeric parameters passed to an operation (e.g. k > N).
class ParameterError : public InputError {
 public:
  explicit ParameterError(const std::string& what) : InputError(what) {}
};

/// Formula evaluated outside its domain, e.g. a zero variance in the ideal residual.
class DomainError : public InputError {
 public:
  explicit DomainError(const std::string& what) : InputError(what) {}
};

/// Numerical failure: non-convergence or a violated deterministic bound. Exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lcm

#endif  // LCM_ERRORS_HPP
