#include "adastep/stepping.hpp"

#include <cmath>
#include <cstdint>

namespace adastep {

namespace {

// 2^63 as a double: coefficient magnitudes at or beyond this leave the
// representable integer range of the floored denominator.
constexpr double kIntegerRangeLimit = 9223372036854775808.0;

void require_valid(const StepRule& rule, double x) {
  if (!(rule.h_bar > 0.0) || !std::isfinite(rule.h_bar)) {
    throw ConfigInvalid("step rule requires finite h_bar > 0");
  }
  if (!std::isfinite(x)) {
    throw NonFiniteState("step computation requires a finite state");
  }
}

}  // namespace

double compute_step(const StepRule& rule, const CoefficientModel& model, double x) {
  require_valid(rule, x);
  if (rule.kind == StepRuleKind::Fixed) {
    return rule.h_bar;
  }

  const double f = eval_f(model, x);
  const double g = eval_g(model, x);
  const double g_squared = g * g;
  if (!(f < kIntegerRangeLimit) || !(g_squared < kIntegerRangeLimit)) {
    throw Overflow("coefficient magnitude beyond the representable integer range");
  }

  if (rule.kind == StepRuleKind::FlooredAdaptive) {
    const std::uint64_t denominator = 1 + static_cast<std::uint64_t>(f)
                                        + static_cast<std::uint64_t>(g_squared);
    return rule.h_bar / static_cast<double>(denominator);
  }
  return rule.h_bar / (1.0 + f + g_squared);
}

bool check_step_bounds(const StepRule& rule, const CoefficientModel& model, double x, double h) {
  if (!(h > 0.0) || !(h <= rule.h_bar)) return false;
  const double f = eval_f(model, x);
  const double g = eval_g(model, x);
  // The bounds h*f <= h_bar and sqrt(h)*g <= sqrt(h_bar) are exact for the
  // rational step h_bar/denominator the rules define, but the double carrying
  // h is correctly rounded, so the evaluated products can exceed the exact
  // value by a fraction of an ulp (observed: f ~ 1e16 > 2^53 with g = 0 gives
  // h*f = h_bar*(1 + 0.8 eps)). Allow that representation error — and only
  // that — with a 4-ulp relative margin; a genuine rule violation is a factor,
  // not an ulp.
  constexpr double kUlpMargin = 1.0 + 4.0 * 2.220446049250313e-16;
  return h * f <= rule.h_bar * kUlpMargin &&
         std::sqrt(h) * g <= std::sqrt(rule.h_bar) * kUlpMargin;
}

NormalizedCoefficients normalized_coefficients(const CoefficientModel& model, double u) {
  if (!std::isfinite(u)) {
    throw NonFiniteState("normalized coefficients require a finite state");
  }
  const double f = eval_f(model, u);
  const double g = eval_g(model, u);
  const double g_squared = g * g;
  if (!std::isfinite(f) || !std::isfinite(g_squared)) {
    throw Overflow("coefficient magnitude overflowed in normalization");
  }
  const double denominator = 1.0 + f + g_squared;
  return {f / denominator, g / std::sqrt(denominator)};
}

}  // namespace adastep
