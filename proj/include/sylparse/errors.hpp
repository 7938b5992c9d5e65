#pragma once

#include <stdexcept>
#include <string>

namespace sylparse {

// Operand shapes do not conform to what an operation expects.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A forward pass produced NaN or Inf.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed corpus, lexicon, vector or checkpoint input.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sylparse
