#pragma once

#include <string_view>

namespace geocbf {

/**
 * Extended class-K-infinity function used in barrier conditions.
 *
 * Both kinds are strictly increasing on all of R, vanish at 0 and are
 * unbounded in both directions.
 */
struct AlphaSpec {
  enum class Kind { Linear, Cubic };

  Kind kind = Kind::Linear;
  double gain = 1.0;

  static AlphaSpec linear(double gain) { return {Kind::Linear, gain}; }
  static AlphaSpec cubic(double gain) { return {Kind::Cubic, gain}; }
};

double alpha_eval(const AlphaSpec& spec, double r);
/// d alpha / dr.
double alpha_derivative(const AlphaSpec& spec, double r);

AlphaSpec::Kind parse_alpha_kind(std::string_view name);
std::string_view to_string(AlphaSpec::Kind kind);

/// (a, b) pair feeding the closed-form filters; b is a squared norm.
struct FilterGainPair {
  double a = 0.0;
  double b = 0.0;

  /// Membership in P = {(a, b) : a > 0 or b > 0}.
  bool in_domain() const { return a > 0.0 || b > 0.0; }
};

/// max{0, -a/b} for b != 0, and 0 for b == 0.
double lambda_qp(double a, double b);

/// Half-Sontag multiplier (-a + sqrt(a^2 + b^2)) / (2b), 0 for b == 0.
double lambda_hs(double a, double b);

struct LambdaPartials {
  double value;
  double d_a;
  double d_b;
};

/// lambda_hs with its partial derivatives; requires b > 0.
LambdaPartials lambda_hs_partials(double a, double b);

}  // namespace geocbf
