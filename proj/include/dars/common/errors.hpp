#pragma once

#include <stdexcept>
#include <string>

namespace dars {

// Shape/precondition violations (dimension mismatch, state out of bounds,
// unknown enum value, ...).
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite values where finite ones are required (loss, targets, policy
// outputs). Carries whatever context the thrower could attach.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dars
