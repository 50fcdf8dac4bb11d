#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "adastep/simulator.hpp"

namespace adastep {

/// A step bound that may be vacuous: when the requested guarantee already
/// holds for every positive step, `unconstrained` is true and `value` is
/// meaningless (no infinity leaks into step rules).
struct StepBound {
  bool unconstrained = false;
  double value = 0.0;
};

/// Theoretical and empirical positivity guarantees for an N-step run.
struct PositivityReport {
  double epsilon = 0.0;
  std::size_t n_steps = 0;
  StepBound h_exact;         ///< largest h_bar with per-step floor^N >= 1 - epsilon
  StepBound h_sasvari_chen;  ///< conservative closed-form substitute, <= h_exact
  double per_step_floor = 0.0;  ///< Phi(1/sqrt(h_bar)) at the h_bar in force
  std::optional<double> mc_frequency;      ///< empirical P[all states positive]
  std::optional<std::size_t> mc_trials;
  double wilson_low = 0.0;   ///< 95% Wilson interval (set with mc_frequency)
  double wilson_high = 0.0;
};

/// Largest step scale keeping N consecutive states positive with probability
/// at least 1 - epsilon: with p = (1-epsilon)^(1/N), returns 1/Phi^-1(p)^2,
/// or Unconstrained when p <= 1/2. The returned value is rounded slightly
/// down (one-sided, ~5e-13 relative) so the guarantee survives the 1e-9
/// tolerance of the CDF inversion.
[[nodiscard]] StepBound exact_step_bound(double epsilon, std::size_t n_steps);

/// Closed-form conservative bound avoiding CDF inversion: with q = 2p - 1,
/// returns 1/(2 ln(1/(1-q^2))), or Unconstrained when q <= 0. Derived from
/// the lower exponential bound Phi(x) > 1/2 + (1/2) sqrt(1 - exp(-x^2/2));
/// dominated by exact_step_bound wherever both are finite.
[[nodiscard]] StepBound sasvari_chen_step_bound(double epsilon, std::size_t n_steps);

/// 95% Wilson score interval for `successes` out of `trials`.
[[nodiscard]] std::pair<double, double> wilson_interval(std::size_t successes,
                                                        std::size_t trials);

/// Monte Carlo estimate of P[X_N > 0, ..., X_0 > 0]: runs `trials`
/// trajectories for exactly cfg.max_steps steps (zero-window termination
/// disabled; explosion still terminates, and a trajectory that exploded while
/// every visited state was positive counts as positive — the guarantee
/// concerns sign, not boundedness). Fills the theoretical bounds at
/// (epsilon, cfg.max_steps) alongside the empirical frequency.
[[nodiscard]] PositivityReport mc_positivity(const SimConfig& cfg, std::size_t trials,
                                             std::uint64_t master_seed, double epsilon = 0.1);

/// Structured text, one `key = value` per line, all report fields plus the
/// Wilson interval; vacuous bounds render as `unconstrained`.
[[nodiscard]] std::string positivity_report_text(const PositivityReport& report);

}  // namespace adastep
