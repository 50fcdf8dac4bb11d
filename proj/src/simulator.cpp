#include "adastep/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace adastep {

double em_step(double x, double h, double f_x, double g_x, double dW) {
  return x * (1.0 + h * f_x + g_x * dW);
}

double normalized_step(double x, double h_bar, double phi, double gamma, double chi) {
  return x * (1.0 + h_bar * phi + std::sqrt(h_bar) * gamma * chi);
}

void validate_config(const SimConfig& cfg) {
  if (!(cfg.rule.h_bar > 0.0) || !std::isfinite(cfg.rule.h_bar)) {
    throw ConfigInvalid("h_bar must be finite and > 0");
  }
  if (cfg.max_steps < 1) {
    throw ConfigInvalid("max_steps must be >= 1");
  }
  if (!(cfg.max_time > 0.0)) {
    throw ConfigInvalid("max_time must be > 0");
  }
  if (!(cfg.explosion_threshold > 0.0)) {
    throw ConfigInvalid("explosion_threshold must be > 0");
  }
  if (!(cfg.zero_threshold > 0.0)) {
    throw ConfigInvalid("zero_threshold must be > 0");
  }
  if (cfg.zero_window < 1) {
    throw ConfigInvalid("zero_window must be >= 1");
  }
  if (!std::isfinite(cfg.initial)) {
    throw ConfigInvalid("initial state must be finite");
  }
  if (cfg.initial > 0.0 &&
      !(cfg.explosion_threshold > cfg.initial && cfg.initial > cfg.zero_threshold)) {
    throw ConfigInvalid("thresholds must satisfy explosion_threshold > initial > zero_threshold");
  }
  if (cfg.scheme == Scheme::NormalizedDiscrete &&
      cfg.rule.kind != StepRuleKind::UnflooredAdaptive) {
    throw ConfigInvalid("the normalized scheme is defined by the unfloored adaptive rule");
  }
}

TrajectoryRecord run_trajectory(const SimConfig& cfg, NoiseSource& src) {
  validate_config(cfg);

  TrajectoryRecord record;
  double x = cfg.initial;
  double t = 0.0;
  std::size_t zero_run = 0;
  record.min_x = x;
  record.max_x = x;
  if (x <= 0.0) record.first_nonpositive_index = 0;

  for (std::size_t n = 0;; ++n) {
    if (zero_run >= cfg.zero_window) {
      record.verdict = Verdict::ConvergedToZero;
      break;
    }
    if (!std::isfinite(x) || std::fabs(x) >= cfg.explosion_threshold) {
      record.verdict = Verdict::Exploded;
      break;
    }
    if (n == cfg.max_steps || t >= cfg.max_time) {
      record.verdict = Verdict::HorizonReached;
      break;
    }

    double h = 0.0;
    try {
      h = compute_step(cfg.rule, cfg.model, x);
    } catch (const Overflow&) {
      record.verdict = Verdict::StepOverflow;
      break;
    }
#ifdef NDEBUG
    const bool verify_bounds = cfg.assert_step_bounds;
#else
    const bool verify_bounds = true;  // always on in debug builds
#endif
    if (verify_bounds && !check_step_bounds(cfg.rule, cfg.model, x, h)) {
      throw InvariantViolation("step-bound estimate violated during trajectory run");
    }

    double increment = 0.0;
    double x_next = 0.0;
    if (cfg.scheme == Scheme::StrongEM) {
      increment = src.wiener_increment(h);
      x_next = em_step(x, h, eval_f(cfg.model, x), eval_g(cfg.model, x), increment);
    } else {
      increment = src.iid_innovation();
      const NormalizedCoefficients nc = normalized_coefficients(cfg.model, x);
      x_next = normalized_step(x, cfg.rule.h_bar, nc.phi, nc.gamma, increment);
    }

    record.steps.push_back({n, t, h, x, increment});
    t += h;
    x = x_next;

    if (std::fabs(x) < cfg.zero_threshold) {
      ++zero_run;
    } else {
      zero_run = 0;
    }
    if (!record.first_nonpositive_index && x <= 0.0) {
      record.first_nonpositive_index = n + 1;
    }
    if (std::isfinite(x)) {
      record.min_x = std::fmin(record.min_x, x);
      record.max_x = std::fmax(record.max_x, x);
    }
  }

  record.final_time = t;
  record.final_x = x;
  return record;
}

namespace {

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out) {
  out << "n,t,h,x,dW\n";
  char line[176];
  for (const StepRow& row : record.steps) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n",
                  row.n, row.t, row.h, row.x, row.dW);
    out << line;
  }
}

std::string trajectory_summary(const TrajectoryRecord& record) {
  std::ostringstream out;
  out << "verdict = " << to_string(record.verdict) << '\n';
  out << "final_time = " << format_real(record.final_time) << '\n';
  out << "final_x = " << format_real(record.final_x) << '\n';
  out << "step_count = " << record.steps.size() << '\n';
  out << "min_x = " << format_real(record.min_x) << '\n';
  out << "max_x = " << format_real(record.max_x) << '\n';
  out << "first_nonpositive_index = ";
  if (record.first_nonpositive_index) {
    out << *record.first_nonpositive_index;
  } else {
    out << "absent";
  }
  out << '\n';
  return out.str();
}

const char* to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::ConvergedToZero: return "ConvergedToZero";
    case Verdict::Exploded: return "Exploded";
    case Verdict::HorizonReached: return "HorizonReached";
    case Verdict::StepOverflow: return "StepOverflow";
  }
  return "HorizonReached";
}

}  // namespace adastep
