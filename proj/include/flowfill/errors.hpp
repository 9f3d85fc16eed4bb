#pragma once

#include <stdexcept>
#include <string>

namespace flowfill {

// File/format/dimension problems. CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Solver non-convergence and similar. CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when homography fitting cannot find enough inlier matches.
struct DegenerateAlignment : std::runtime_error {
  explicit DegenerateAlignment(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace flowfill
