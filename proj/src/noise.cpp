#include "adastep/noise.hpp"

#include <cmath>

namespace adastep {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrtTwoPi = 0.39894228040143267794;
constexpr double kThirdMomentMargin = 0.03;

// Rational initial approximation to the inverse normal CDF (relative error
// ~1.15e-9 before polishing), lower-tail and central branches.
double inverse_cdf_initial(double p) {
  constexpr double kCentralLow = 0.02425;
  if (p < kCentralLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
               - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
             + 4.374664141464968e+00) * q + 2.938163982698783e+00) /
           ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
              + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
             - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
           - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q /
         (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
             - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
           - 1.328068155288572e+01) * r + 1.0);
}

// Two Newton corrections against normal_cdf push the initial approximation
// to near machine accuracy; the density guard keeps extreme subnormal tails
// from dividing by zero.
double inverse_cdf_core(double p) {
  double x = inverse_cdf_initial(p);
  for (int iteration = 0; iteration < 2; ++iteration) {
    const double density = kInvSqrtTwoPi * std::exp(-0.5 * x * x);
    if (!(density > 0.0)) break;
    const double correction = (normal_cdf(x) - p) / density;
    if (!std::isfinite(correction)) break;
    x -= correction;
  }
  return x;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_cdf_inv(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw OutOfDomain("normal_cdf_inv requires p strictly inside (0, 1)");
  }
  // For p > 1/2 the reflection uses 1 - p, which is exact in floating point,
  // so both tails are computed at full lower-tail accuracy.
  if (p > 0.5) return -inverse_cdf_core(1.0 - p);
  return inverse_cdf_core(p);
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  std::uint64_t z = master_seed + (stream_index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

NoiseSource::NoiseSource(std::uint64_t seed, NoiseMode mode)
    : engine_(seed), seed_(seed), mode_(mode) {}

NoiseSource NoiseSource::for_trajectory(std::uint64_t master_seed,
                                        std::uint64_t trajectory_index, NoiseMode mode) {
  return NoiseSource(derive_stream_seed(master_seed, trajectory_index), mode);
}

double NoiseSource::next_standard_normal() {
  if (draw_count_ == splice_at_) {
    engine_.seed(splice_seed_);
    splice_at_ = kNoSplice;
  }
  // One engine output per sample: 52 high bits plus a half-step keep the
  // uniform strictly inside (0, 1), so the inverse CDF is always finite.
  const std::uint64_t bits = engine_();
  const double uniform = (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
  ++draw_count_;
  return normal_cdf_inv(uniform);
}

double NoiseSource::wiener_increment(double h) {
  if (mode_ != NoiseMode::WienerIncrements) {
    throw ConfigInvalid("wiener_increment requires WienerIncrements mode");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw NonPositiveStep("wiener_increment requires a finite step h > 0");
  }
  return std::sqrt(h) * next_standard_normal();
}

double NoiseSource::iid_innovation() {
  if (mode_ != NoiseMode::IidInnovations) {
    throw ConfigInvalid("iid_innovation requires IidInnovations mode");
  }
  return next_standard_normal();
}

void NoiseSource::perturb_after(std::uint64_t draws_from_now, std::uint64_t replacement_seed) {
  splice_at_ = draw_count_ + draws_from_now;
  splice_seed_ = replacement_seed;
}

MomentCheckReport conditional_moment_check(NoiseSource& src,
                                           const std::vector<double>& h_sequence,
                                           std::size_t samples) {
  if (samples == 0) {
    throw ConfigInvalid("conditional_moment_check requires samples >= 1");
  }
  MomentCheckReport report;
  report.all_ok = true;
  report.rows.reserve(h_sequence.size());

  for (const double h : h_sequence) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw NonPositiveStep("conditional_moment_check requires every h > 0");
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    double sum_abs_cubed = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double dw = src.wiener_increment(h);
      sum += dw;
      sum_sq += dw * dw;
      sum_abs_cubed += std::fabs(dw) * dw * dw;
    }
    const double n = static_cast<double>(samples);

    MomentRow row;
    row.h = h;
    row.mean = sum / n;
    row.second_moment = sum_sq / n;
    row.abs_third_moment = sum_abs_cubed / n;
    row.mean_tolerance = 4.0 * std::sqrt(h / n);
    row.second_tolerance = 4.0 * h * std::sqrt(2.0 / n);
    row.third_bound =
        kAbsThirdMomentOfStandardNormal * (1.0 + kThirdMomentMargin) * std::pow(h, 1.5);
    row.mean_ok = std::fabs(row.mean) <= row.mean_tolerance;
    row.second_ok = std::fabs(row.second_moment - h) <= row.second_tolerance;
    row.third_ok = row.abs_third_moment <= row.third_bound;
    report.all_ok = report.all_ok && row.mean_ok && row.second_ok && row.third_ok;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace adastep
