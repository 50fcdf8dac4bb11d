#include "adastep/positivity.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "adastep/noise.hpp"
#include "adastep/parallel.hpp"

namespace adastep {

namespace {

// Phi^-1(0.975): z-score of the 95% Wilson interval.
constexpr double kWilsonZ = 1.9599639845400542;

// One-sided relative nudge applied to the inverted quantile so the exact
// bound stays on the guaranteed side of the CDF inversion tolerance.
constexpr double kConservativeRounding = 5e-13;

double per_step_survival(double h_bar) { return normal_cdf(1.0 / std::sqrt(h_bar)); }

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void require_epsilon_domain(double epsilon, std::size_t n_steps) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw OutOfDomain("epsilon must lie strictly inside (0, 1)");
  }
  if (n_steps < 1) {
    throw OutOfDomain("the step count N must be >= 1");
  }
}

}  // namespace

StepBound exact_step_bound(double epsilon, std::size_t n_steps) {
  require_epsilon_domain(epsilon, n_steps);
  const double p = std::pow(1.0 - epsilon, 1.0 / static_cast<double>(n_steps));
  if (p <= 0.5) {
    return {true, 0.0};
  }
  const double quantile = normal_cdf_inv(p) * (1.0 + kConservativeRounding);
  return {false, 1.0 / (quantile * quantile)};
}

StepBound sasvari_chen_step_bound(double epsilon, std::size_t n_steps) {
  require_epsilon_domain(epsilon, n_steps);
  const double p = std::pow(1.0 - epsilon, 1.0 / static_cast<double>(n_steps));
  const double q = 2.0 * p - 1.0;
  if (q <= 0.0) {
    return {true, 0.0};
  }
  // ln(1 - q^2) = ln(2(1-p)) + ln(1+q); the 1-p difference is exact for
  // p >= 1/2, so the cancellation-prone factor is computed without loss.
  const double log_one_minus_q_squared = std::log(2.0 * (1.0 - p)) + std::log1p(q);
  return {false, -1.0 / (2.0 * log_one_minus_q_squared)};
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) {
    throw ConfigInvalid("wilson_interval requires trials >= 1");
  }
  const double n = static_cast<double>(trials);
  const double p_hat = static_cast<double>(successes) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denominator = 1.0 + z2 / n;
  const double center = (p_hat + z2 / (2.0 * n)) / denominator;
  const double half_width =
      kWilsonZ * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denominator;
  return {center - half_width, center + half_width};
}

PositivityReport mc_positivity(const SimConfig& cfg, std::size_t trials,
                               std::uint64_t master_seed, double epsilon) {
  if (!(cfg.initial > 0.0)) {
    throw ConfigInvalid("mc_positivity requires a positive initial state");
  }
  if (trials < 1) {
    throw ConfigInvalid("mc_positivity requires trials >= 1");
  }
  validate_config(cfg);

  // Run every trajectory for the full N steps: a window large enough never to
  // fill disables early zero-convergence termination, while explosion still
  // terminates (sign history up to that point decides positivity).
  SimConfig run_cfg = cfg;
  run_cfg.zero_window = cfg.max_steps + 2;

  const NoiseMode mode = cfg.scheme == Scheme::StrongEM ? NoiseMode::WienerIncrements
                                                        : NoiseMode::IidInnovations;
  std::vector<unsigned char> positive(trials, 0);
  detail::parallel_for_index(trials, [&](std::size_t index) {
    NoiseSource src = NoiseSource::for_trajectory(master_seed, index, mode);
    const TrajectoryRecord record = run_trajectory(run_cfg, src);
    positive[index] = record.first_nonpositive_index ? 0 : 1;
  });

  std::size_t positive_count = 0;
  for (const unsigned char flag : positive) positive_count += flag;

  PositivityReport report;
  report.epsilon = epsilon;
  report.n_steps = cfg.max_steps;
  report.h_exact = exact_step_bound(epsilon, cfg.max_steps);
  report.h_sasvari_chen = sasvari_chen_step_bound(epsilon, cfg.max_steps);
  report.per_step_floor = per_step_survival(cfg.rule.h_bar);
  report.mc_frequency = static_cast<double>(positive_count) / static_cast<double>(trials);
  report.mc_trials = trials;
  const auto [low, high] = wilson_interval(positive_count, trials);
  report.wilson_low = low;
  report.wilson_high = high;
  return report;
}

std::string positivity_report_text(const PositivityReport& report) {
  std::ostringstream out;
  out << "epsilon = " << format_real(report.epsilon) << '\n';
  out << "n_steps = " << report.n_steps << '\n';
  out << "h_exact = "
      << (report.h_exact.unconstrained ? "unconstrained" : format_real(report.h_exact.value))
      << '\n';
  out << "h_sasvari_chen = "
      << (report.h_sasvari_chen.unconstrained ? "unconstrained"
                                              : format_real(report.h_sasvari_chen.value))
      << '\n';
  out << "per_step_floor = " << format_real(report.per_step_floor) << '\n';
  out << "mc_frequency = "
      << (report.mc_frequency ? format_real(*report.mc_frequency) : "absent") << '\n';
  out << "mc_trials = ";
  if (report.mc_trials) {
    out << *report.mc_trials;
  } else {
    out << "absent";
  }
  out << '\n';
  if (report.mc_frequency) {
    out << "wilson_low = " << format_real(report.wilson_low) << '\n';
    out << "wilson_high = " << format_real(report.wilson_high) << '\n';
  }
  return out.str();
}

}  // namespace adastep
