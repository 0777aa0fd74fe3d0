#include "geocbf/scalar_filters.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "geocbf/errors.hpp"

namespace geocbf {

namespace {

void require_gain(const AlphaSpec& spec) {
  if (!(spec.gain > 0.0) || !std::isfinite(spec.gain))
    throw std::invalid_argument("alpha gain must be positive and finite");
}

void require_domain(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("filter gains must be finite");
  if (b < 0.0) throw std::invalid_argument("b must be nonnegative");
  if (a <= 0.0 && b == 0.0) throw CbfConditionViolated(a, b);
}

}  // namespace

double alpha_eval(const AlphaSpec& spec, double r) {
  require_gain(spec);
  if (!std::isfinite(r)) throw std::invalid_argument("alpha argument must be finite");
  switch (spec.kind) {
    case AlphaSpec::Kind::Linear:
      return spec.gain * r;
    case AlphaSpec::Kind::Cubic:
      return spec.gain * r * r * r;
  }
  return 0.0;
}

double alpha_derivative(const AlphaSpec& spec, double r) {
  require_gain(spec);
  if (!std::isfinite(r)) throw std::invalid_argument("alpha argument must be finite");
  switch (spec.kind) {
    case AlphaSpec::Kind::Linear:
      return spec.gain;
    case AlphaSpec::Kind::Cubic:
      return 3.0 * spec.gain * r * r;
  }
  return 0.0;
}

AlphaSpec::Kind parse_alpha_kind(std::string_view name) {
  if (name == "linear") return AlphaSpec::Kind::Linear;
  if (name == "cubic") return AlphaSpec::Kind::Cubic;
  throw std::invalid_argument("unknown alpha kind '" + std::string(name) +
                              "' (expected linear or cubic)");
}

std::string_view to_string(AlphaSpec::Kind kind) {
  return kind == AlphaSpec::Kind::Linear ? "linear" : "cubic";
}

double lambda_qp(double a, double b) {
  require_domain(a, b);
  if (b == 0.0) return 0.0;
  return a >= 0.0 ? 0.0 : -a / b;
}

double lambda_hs(double a, double b) {
  require_domain(a, b);
  if (b == 0.0) return 0.0;
  const double r = std::hypot(a, b);
  // (-a + r) cancels badly for a >> b; use the conjugate form there.
  if (a > 0.0) return b / (2.0 * (a + r));
  return (r - a) / (2.0 * b);
}

LambdaPartials lambda_hs_partials(double a, double b) {
  require_domain(a, b);
  if (b == 0.0)
    throw std::invalid_argument("lambda_hs partials require b > 0");
  const double r = std::hypot(a, b);
  const double value = lambda_hs(a, b);
  const double d_a = -value / r;
  const double d_b =
      a > 0.0 ? a / (2.0 * r * (a + r)) : 1.0 / (2.0 * r) - value / b;
  return {value, d_a, d_b};
}

}  // namespace geocbf
