#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "adastep/coefficients.hpp"
#include "adastep/noise.hpp"
#include "adastep/stepping.hpp"

namespace adastep {

enum class Scheme { StrongEM, NormalizedDiscrete };

enum class Verdict { ConvergedToZero, Exploded, HorizonReached, StepOverflow };

/// Configuration of one trajectory run.
struct SimConfig {
  Scheme scheme = Scheme::StrongEM;
  StepRule rule;
  CoefficientModel model = CoefficientModel::polynomial(2.0, 1.0);
  double initial = 1.0;  ///< starting state X_0
  std::size_t max_steps = 10000;
  double max_time = std::numeric_limits<double>::infinity();
  double explosion_threshold = 1e8;  ///< |X| at or above this => Exploded
  double zero_threshold = 1e-8;      ///< |X| below this counts toward the zero window
  std::size_t zero_window = 100;     ///< consecutive sub-threshold states => ConvergedToZero
  /// Verify the step-bound estimates on every step. Debug builds assert
  /// unconditionally; in release builds this flag opts in. Note that fixed
  /// steps cannot satisfy the bounds once the coefficient response exceeds 1,
  /// so enabling this with StepRuleKind::Fixed rejects such trajectories.
  bool assert_step_bounds = false;
};

/// One executed step: state x_n at time t_n advanced by h_n using increment dW.
struct StepRow {
  std::size_t n = 0;
  double t = 0.0;
  double h = 0.0;
  double x = 0.0;
  double dW = 0.0;  ///< Wiener increment (StrongEM) or unit innovation (NormalizedDiscrete)
};

/// Full history of one trajectory plus its termination classification.
///
/// `steps` holds one row per executed step (states X_0..X_{m-1}); the terminal
/// state X_m is exposed through final_x / final_time, and min_x / max_x /
/// first_nonpositive_index cover every visited state including X_m.
struct TrajectoryRecord {
  std::vector<StepRow> steps;
  Verdict verdict = Verdict::HorizonReached;
  std::optional<std::size_t> first_nonpositive_index;  ///< minimal n with X_n <= 0
  double final_time = 0.0;
  double final_x = 0.0;
  double min_x = 0.0;
  double max_x = 0.0;
};

/// One explicit strong-scheme update, evaluated in the exact factored form
/// x * (1 + h f + g dW) so the equilibrium X = 0 is absorbing in floating point.
[[nodiscard]] double em_step(double x, double h, double f_x, double g_x, double dW);

/// One normalized-recursion update x * (1 + h_bar phi + sqrt(h_bar) gamma chi).
[[nodiscard]] double normalized_step(double x, double h_bar, double phi, double gamma,
                                     double chi);

/// Throws ConfigInvalid when cfg is not runnable (non-positive h_bar or
/// thresholds, zero max_steps/zero_window, threshold ordering violated, or the
/// normalized scheme paired with a rule other than UnflooredAdaptive — the
/// normalized recursion is defined by the unfloored denominator).
void validate_config(const SimConfig& cfg);

/// Runs one trajectory: per iteration the verdict checks run at the current
/// state (ConvergedToZero, then Exploded, then HorizonReached), then the step
/// is computed from that state, the step bounds are asserted, one increment is
/// drawn with the just-fixed variance, and the factored update is applied.
/// A step-computation overflow terminates with verdict StepOverflow.
[[nodiscard]] TrajectoryRecord run_trajectory(const SimConfig& cfg, NoiseSource& src);

/// Writes the step history as CSV: header `n,t,h,x,dW`, one row per step,
/// 17 significant digits, LF line endings.
void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out);

/// Structured-text summary: verdict, final_time, final_x, step_count,
/// min_x, max_x, first_nonpositive_index — one `key = value` per line.
[[nodiscard]] std::string trajectory_summary(const TrajectoryRecord& record);

[[nodiscard]] const char* to_string(Verdict verdict) noexcept;

}  // namespace adastep
