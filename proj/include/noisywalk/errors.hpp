#pragma once

#include <stdexcept>
#include <string>

namespace noisywalk {

/// Malformed arguments: out-of-range generators, rank mismatches, bad rho.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A measure or config that is well-formed but fails its consistency checks.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested quantity is not cheaply computable for this measure.
class UnsupportedRegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation exceeded its support cap or enumeration budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Convolution support exceeded the cap.  Carries the mass that a truncating
/// run would have had to drop at the step where the cap was hit.
class TruncationError : public BudgetError {
 public:
  TruncationError(const std::string& what, int step, double lost_mass)
      : BudgetError(what), step_(step), lost_mass_(lost_mass) {}

  int step() const noexcept { return step_; }
  double lost_mass() const noexcept { return lost_mass_; }

 private:
  int step_;
  double lost_mass_;
};

}  // namespace noisywalk
