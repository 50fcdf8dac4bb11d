#pragma once

#include <functional>
#include <vector>

#include "adastep/errors.hpp"

namespace adastep {

enum class ModelKind { Polynomial, Custom };

enum class StabilityClass { AlmostSureStable, AlmostSureUnstable, Boundary, Indeterminate };

/// Result of classifying the zero equilibrium from the ratio 2f/g^2.
struct StabilityVerdict {
  double ratio_sup = 0.0;             ///< sup over probed u != 0 of 2f(u)/g^2(u); may be +inf.
  double ratio_liminf_at_zero = 0.0;  ///< estimate of liminf of 2f/g^2 as u -> 0; may be +inf.
  StabilityClass cls = StabilityClass::Indeterminate;
};

/// The coefficient pair (f, g) of the scalar SDE dX = X f(X) dt + X g(X) dW.
///
/// Both coefficients must be non-negative everywhere, and g may vanish only at
/// u = 0. The Polynomial kind evaluates f(u) = |u|^nu and g(u) = sigma |u|^(nu/2)
/// exactly; absolute values keep both invariants valid on sign-flipped states.
class CoefficientModel {
 public:
  using Coefficient = std::function<double(double)>;

  /// Builds the polynomial model f(u) = |u|^nu, g(u) = sigma |u|^(nu/2).
  static CoefficientModel polynomial(double nu, double sigma);

  /// Wraps arbitrary coefficient callables; non-negativity is checked per call.
  static CoefficientModel custom(Coefficient f, Coefficient g);

  [[nodiscard]] ModelKind kind() const noexcept { return kind_; }
  [[nodiscard]] double nu() const noexcept { return nu_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }

  /// Drift multiplier f(u) >= 0.
  [[nodiscard]] double f(double u) const;

  /// Diffusion multiplier g(u) >= 0, with g(u) > 0 enforced for u != 0 on
  /// custom models (polynomial models with sigma = 0 are the drift-only case).
  [[nodiscard]] double g(double u) const;

 private:
  CoefficientModel() = default;

  ModelKind kind_ = ModelKind::Polynomial;
  double nu_ = 0.0;
  double sigma_ = 0.0;
  Coefficient f_eval_;
  Coefficient g_eval_;
};

/// Evaluates the drift multiplier; throws NonNegativityViolation on f(u) < 0.
[[nodiscard]] double eval_f(const CoefficientModel& model, double u);

/// Evaluates the diffusion multiplier; throws NonNegativityViolation on
/// g(u) < 0 and ZeroDiffusionAtNonzero when a custom g vanishes at u != 0.
[[nodiscard]] double eval_g(const CoefficientModel& model, double u);

/// Classifies the zero equilibrium from the ratio 2f/g^2.
///
/// Polynomial models have the constant ratio 2/sigma^2 (probe grid ignored);
/// sigma = 0 degenerates to ratio +inf, which is the deterministic-explosion
/// regime and classifies as AlmostSureUnstable. Custom models are sampled on
/// probe_grid: the max estimates the sup, the entry nearest zero estimates
/// the liminf, and estimates straddling 1 yield Indeterminate. A ratio within
/// 1e-12 of 1 classifies as Boundary.
[[nodiscard]] StabilityVerdict classify_stability(const CoefficientModel& model,
                                                  const std::vector<double>& probe_grid);

/// Blow-up time of the drift-only ODE x' = x^(1+nu): initial^(-nu) / nu for
/// nu > 0, +inf for nu = 0. Polynomial models only.
[[nodiscard]] double ode_explosion_time(const CoefficientModel& model, double initial);

[[nodiscard]] const char* to_string(StabilityClass cls) noexcept;

}  // namespace adastep
