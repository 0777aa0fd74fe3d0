#include "geocbf/errors.hpp"

#include <sstream>

namespace geocbf {

namespace {

std::string violated_message(double a, double b) {
  std::ostringstream os;
  os << "CBF condition violated: a = " << a << ", b = " << b
     << " (need a > 0 or b > 0)";
  return os.str();
}

std::string divergence_message(double t) {
  std::ostringstream os;
  os << "integration diverged (non-finite state) at t = " << t;
  return os.str();
}

}  // namespace

CbfConditionViolated::CbfConditionViolated(double a, double b)
    : std::runtime_error(violated_message(a, b)), a_(a), b_(b) {}

Divergence::Divergence(double time)
    : std::runtime_error(divergence_message(time)), time_(time) {}

}  // namespace geocbf
