#pragma once

#include <stdexcept>
#include <string>

namespace afmm {

/// Invalid parameter value (bad gamma, r < 2, lmax beyond the depth cap, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data, e.g. a point outside the unit cube.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operator was applied outside its precondition (wrong list, singleton node, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares calibration could not be carried out on the given data.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The O(N^2) reference evaluator refused a problem above its size cap.
class OracleCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace afmm
