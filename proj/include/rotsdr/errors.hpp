#pragma once

#include <stdexcept>
#include <string>

namespace rotsdr {

// Thrown when a certificate constructor is asked to certify an instance
// that violates the preconditions of its regime (e.g. an outlier with
// c_j^2 >= lambda_min(Q_j) handed to the small-c construction).
struct regime_mismatch_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Brute-force enumeration is capped at ell <= 16.
struct unsupported_size_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rank-one extraction failed because the leading eigenvector has a
// vanishing first block.
struct degenerate_extraction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rotsdr
