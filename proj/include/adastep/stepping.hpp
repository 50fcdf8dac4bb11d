#pragma once

#include "adastep/coefficients.hpp"
#include "adastep/errors.hpp"

namespace adastep {

enum class StepRuleKind { FlooredAdaptive, UnflooredAdaptive, Fixed };

/// Timestep strategy: adaptive (floored or unfloored denominator) or fixed.
struct StepRule {
  StepRuleKind kind = StepRuleKind::FlooredAdaptive;
  double h_bar = 1.0;  ///< step-scale parameter; the largest step any rule emits.
};

/// Per-step coefficient pair of the normalized recursion:
/// phi = f/(1+f+g^2) and gamma = g/sqrt(1+f+g^2), both in [0, 1].
struct NormalizedCoefficients {
  double phi = 0.0;
  double gamma = 0.0;
};

/// Computes the step h for state x.
///
/// FlooredAdaptive: h_bar / (1 + floor(f(x)) + floor(g^2(x))) — the denominator
/// is an exact positive integer, so rational h_bar gives rational steps.
/// UnflooredAdaptive: h_bar / (1 + f(x) + g^2(x)). Fixed: h_bar.
/// Throws NonFiniteState for NaN/inf x and Overflow once f or g^2 reaches 2^63
/// (such states are beyond any plausible explosion threshold).
[[nodiscard]] double compute_step(const StepRule& rule, const CoefficientModel& model, double x);

/// True iff h lies in (0, h_bar], h*f(x) <= h_bar, and sqrt(h)*g(x) <= sqrt(h_bar).
/// These three estimates hold for every step the rules above produce; the
/// simulator asserts them on every step it takes.
[[nodiscard]] bool check_step_bounds(const StepRule& rule, const CoefficientModel& model,
                                     double x, double h);

/// Evaluates (phi, gamma) at u. Preserves the stability ratio exactly:
/// 2*phi/gamma^2 = 2f/g^2 wherever g(u) != 0.
[[nodiscard]] NormalizedCoefficients normalized_coefficients(const CoefficientModel& model,
                                                             double u);

}  // namespace adastep
