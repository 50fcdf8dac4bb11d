#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "adastep/errors.hpp"

namespace adastep {

enum class NoiseMode { WienerIncrements, IidInnovations };

/// Derives an independent stream seed from a master seed and a stream index
/// (splitmix-style finalizer), so per-trajectory streams are reproducible
/// regardless of scheduling.
[[nodiscard]] std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                               std::uint64_t stream_index);

/// Seedable random source owned by exactly one trajectory.
///
/// Normal samples come from the inverse-CDF transform of one uniform draw, so
/// each sample consumes exactly one engine output and streams can be spliced
/// at an exact draw index. Identical (seed, mode) and identical requested
/// variances give bit-identical sequences.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, NoiseMode mode);

  /// Stream derived from (master_seed, trajectory_index).
  [[nodiscard]] static NoiseSource for_trajectory(std::uint64_t master_seed,
                                                  std::uint64_t trajectory_index,
                                                  NoiseMode mode);

  /// One sample of Normal(0, h); h must be the step already fixed for this
  /// iteration, so the increment never anticipates the path.
  [[nodiscard]] double wiener_increment(double h);

  /// One standard-normal innovation for the normalized recursion.
  [[nodiscard]] double iid_innovation();

  /// Replaces the engine state with `replacement_seed` once `draws_from_now`
  /// further samples have been taken: draws 1..k stay identical, draws k+1..
  /// differ. Supports the non-anticipativity splice test.
  void perturb_after(std::uint64_t draws_from_now, std::uint64_t replacement_seed);

  [[nodiscard]] std::uint64_t draw_count() const noexcept { return draw_count_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] NoiseMode mode() const noexcept { return mode_; }

 private:
  double next_standard_normal();

  static constexpr std::uint64_t kNoSplice = ~static_cast<std::uint64_t>(0);

  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
  NoiseMode mode_ = NoiseMode::WienerIncrements;
  std::uint64_t draw_count_ = 0;
  std::uint64_t splice_at_ = kNoSplice;
  std::uint64_t splice_seed_ = 0;
};

/// Standard normal CDF, absolute error below 1e-12 (complementary error
/// function evaluation).
[[nodiscard]] double normal_cdf(double x);

/// Inverse standard normal CDF on (0,1): rational initial approximation
/// polished by two Newton steps against normal_cdf; |Phi(result) - p| < 1e-9.
/// Throws OutOfDomain for p outside (0,1).
[[nodiscard]] double normal_cdf_inv(double p);

/// One row of the conditional-moment verification at a given step h.
struct MomentRow {
  double h = 0.0;
  double mean = 0.0;              ///< sample mean of the increments
  double second_moment = 0.0;     ///< sample mean of squared increments
  double abs_third_moment = 0.0;  ///< sample mean of |increment|^3
  double mean_tolerance = 0.0;    ///< 4 standard errors for the mean
  double second_tolerance = 0.0;  ///< 4 standard errors for the second moment
  double third_bound = 0.0;       ///< K * h^(3/2) with K = 2*sqrt(2/pi)*(1+margin)
  bool mean_ok = false;
  bool second_ok = false;
  bool third_ok = false;
};

struct MomentCheckReport {
  std::vector<MomentRow> rows;
  bool all_ok = false;
};

/// Exact absolute third moment of a standard normal, 2*sqrt(2/pi).
inline constexpr double kAbsThirdMomentOfStandardNormal = 1.5957691216057307;

/// Draws `samples` increments per entry of h_sequence and verifies the
/// conditional moment contract: mean ~ 0 and second moment ~ h within four
/// standard errors, and E|dW|^3 <= K h^(3/2) with a 3% margin on K.
[[nodiscard]] MomentCheckReport conditional_moment_check(NoiseSource& src,
                                                         const std::vector<double>& h_sequence,
                                                         std::size_t samples);

}  // namespace adastep
