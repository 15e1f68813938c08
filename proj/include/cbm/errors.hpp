#pragma once

#include <stdexcept>
#include <string>

namespace cbm {

//! Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
  public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

//! Raised when a numerical procedure cannot deliver its stated accuracy
//! (quadrature non-convergence, root bracketing failure, ...).
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
[[noreturn]] void fail_validation(const std::string& where, const std::string& what);
[[noreturn]] void fail_numerical(const std::string& where, const std::string& what);

inline void require(bool condition, const char* where, const char* what) {
    if (!condition) fail_validation(where, what);
}
}  // namespace detail

}  // namespace cbm
