#pragma once

#include <stdexcept>
#include <string>

namespace siglift {

// Bad input: shapes, ranges, malformed specs. CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A work or memory guard refused the request. CLI exit code 3.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace siglift
