#include "adastep/coefficients.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>

namespace adastep {

namespace {

constexpr double kBoundaryTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

CoefficientModel CoefficientModel::polynomial(double nu, double sigma) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw ConfigInvalid("polynomial model requires nu >= 0 and finite");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigInvalid("polynomial model requires sigma >= 0 and finite");
  }
  CoefficientModel model;
  model.kind_ = ModelKind::Polynomial;
  model.nu_ = nu;
  model.sigma_ = sigma;
  return model;
}

CoefficientModel CoefficientModel::custom(Coefficient f, Coefficient g) {
  if (!f || !g) {
    throw ConfigInvalid("custom model requires both coefficient callables");
  }
  CoefficientModel model;
  model.kind_ = ModelKind::Custom;
  model.f_eval_ = std::move(f);
  model.g_eval_ = std::move(g);
  return model;
}

double CoefficientModel::f(double u) const {
  if (kind_ == ModelKind::Polynomial) {
    return std::pow(std::fabs(u), nu_);
  }
  const double value = f_eval_(u);
  if (!(value >= 0.0)) {
    throw NonNegativityViolation("custom drift coefficient returned a negative or NaN value");
  }
  return value;
}

double CoefficientModel::g(double u) const {
  if (kind_ == ModelKind::Polynomial) {
    return sigma_ * std::pow(std::fabs(u), 0.5 * nu_);
  }
  const double value = g_eval_(u);
  if (!(value >= 0.0)) {
    throw NonNegativityViolation("custom diffusion coefficient returned a negative or NaN value");
  }
  if (u != 0.0 && value == 0.0) {
    throw ZeroDiffusionAtNonzero("custom diffusion coefficient vanished away from zero");
  }
  return value;
}

double eval_f(const CoefficientModel& model, double u) { return model.f(u); }

double eval_g(const CoefficientModel& model, double u) { return model.g(u); }

namespace {

StabilityClass classify_from_estimates(double ratio_sup, double ratio_liminf) {
  const bool sup_on_boundary =
      std::isfinite(ratio_sup) && std::fabs(ratio_sup - 1.0) <= kBoundaryTolerance;
  const bool liminf_on_boundary =
      std::isfinite(ratio_liminf) && std::fabs(ratio_liminf - 1.0) <= kBoundaryTolerance;
  if (sup_on_boundary || liminf_on_boundary) return StabilityClass::Boundary;
  if (ratio_sup < 1.0) return StabilityClass::AlmostSureStable;
  if (ratio_liminf > 1.0) return StabilityClass::AlmostSureUnstable;
  return StabilityClass::Indeterminate;
}

}  // namespace

StabilityVerdict classify_stability(const CoefficientModel& model,
                                    const std::vector<double>& probe_grid) {
  StabilityVerdict verdict;

  if (model.kind() == ModelKind::Polynomial) {
    if (model.sigma() == 0.0) {
      // Degenerate diffusion: the drift-only dynamics blow up, which is the
      // unstable regime; the ratio is unbounded.
      verdict.ratio_sup = kInf;
      verdict.ratio_liminf_at_zero = kInf;
      verdict.cls = StabilityClass::AlmostSureUnstable;
      return verdict;
    }
    const double ratio = 2.0 / (model.sigma() * model.sigma());
    verdict.ratio_sup = ratio;
    verdict.ratio_liminf_at_zero = ratio;
    verdict.cls = classify_from_estimates(ratio, ratio);
    return verdict;
  }

  if (probe_grid.empty()) {
    throw ConfigInvalid("classify_stability requires a non-empty probe grid for custom models");
  }

  double sup = -kInf;
  double liminf = 0.0;
  double nearest = kInf;
  bool any_nonzero_g = false;
  for (const double u : probe_grid) {
    if (u == 0.0 || !std::isfinite(u)) {
      throw ConfigInvalid("probe grid entries must be finite and nonzero");
    }
    const double fu = eval_f(model, u);
    double ratio = kInf;
    try {
      const double gu = eval_g(model, u);
      ratio = 2.0 * fu / (gu * gu);
      any_nonzero_g = true;
    } catch (const ZeroDiffusionAtNonzero&) {
      // A vanishing diffusion at this probe point gives an unbounded ratio.
    }
    sup = std::max(sup, ratio);
    if (std::fabs(u) < nearest) {
      nearest = std::fabs(u);
      liminf = ratio;
    }
  }

  verdict.ratio_sup = sup;
  verdict.ratio_liminf_at_zero = liminf;
  if (!any_nonzero_g) {
    verdict.cls = StabilityClass::AlmostSureUnstable;
    return verdict;
  }
  verdict.cls = classify_from_estimates(sup, liminf);
  return verdict;
}

double ode_explosion_time(const CoefficientModel& model, double initial) {
  if (model.kind() != ModelKind::Polynomial) {
    throw ConfigInvalid("the closed-form explosion time requires a polynomial model");
  }
  if (!(initial > 0.0) || !std::isfinite(initial)) {
    throw NonPositiveInitial("explosion time requires a finite initial value > 0");
  }
  const double nu = model.nu();
  if (nu == 0.0) return kInf;
  return std::pow(initial, -nu) / nu;
}

const char* to_string(StabilityClass cls) noexcept {
  switch (cls) {
    case StabilityClass::AlmostSureStable: return "AlmostSureStable";
    case StabilityClass::AlmostSureUnstable: return "AlmostSureUnstable";
    case StabilityClass::Boundary: return "Boundary";
    case StabilityClass::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

}  // namespace adastep
