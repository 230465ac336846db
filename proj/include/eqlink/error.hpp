#pragma once

#include <stdexcept>
#include <string>

namespace eqlink {

enum class ErrorKind {
  kInvalidInput,      // dimension mismatch, nonpositive spot or weight, bad dates
  kInvalidMarket,     // validate_market reported violations
  kUnmatchableSkew,   // three-moment fit requires positive skewness
  kDegenerate,        // zero variance where a fit was requested
  kNotPositiveSemidefinite,
  kUnsupported,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eqlink
