#pragma once

#include <stdexcept>
#include <string>

namespace gridsynth {

// Invalid user input: bad dimensions, out-of-range indices, malformed files.
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A request whose cost exceeds a configured enumeration budget.
// The CLI maps this to exit code 3.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, long long candidate_count)
      : std::runtime_error(what), candidate_count_(candidate_count) {}

  long long candidate_count() const { return candidate_count_; }

 private:
  long long candidate_count_;
};

}  // namespace gridsynth
