#pragma once

#include <stdexcept>
#include <string>

namespace geocbf {

/// Raised when (a, b) leaves the set {a > 0 or b > 0}: h is not a CBF at the
/// evaluation point, so no filter value exists.
class CbfConditionViolated : public std::runtime_error {
public:
  CbfConditionViolated(double a, double b);
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

private:
  double a_;
  double b_;
};

/// Configuration outside the region where the safe velocity field is defined.
class OutsideDomain : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite state produced by the integrator.
class Divergence : public std::runtime_error {
public:
  explicit Divergence(double time);
  double time() const noexcept { return time_; }

private:
  double time_;
};

}  // namespace geocbf
