#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adastep/coefficients.hpp"
#include "adastep/ensemble.hpp"
#include "adastep/errors.hpp"
#include "adastep/noise.hpp"
#include "adastep/positivity.hpp"
#include "adastep/simulator.hpp"

namespace {

using namespace adastep;

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

// One bag of option values shared by all subcommands; each subcommand
// registers only the flags it understands. `setters` lets a config file
// assign the same values by key, and `cli_option` lets command-line flags
// take precedence over file entries.
struct Options {
  double nu = 2.0;
  double sigma = 1.0;
  double initial = 1.0;
  double hbar = 1.0;
  std::string rule = "floored";
  std::string scheme = "strong";
  std::size_t steps = 10000;
  double max_time = std::numeric_limits<double>::infinity();
  double explosion_threshold = 1e8;
  double zero_threshold = 1e-8;
  std::size_t zero_window = 100;
  std::size_t trials = 1;
  std::string seed_text = "1";
  double epsilon = 0.1;
  std::size_t samples = 1000000;
  std::vector<double> h_values = {1.0, 0.1, 0.01};
  std::string out_dir;
  std::string config_file;

  std::map<std::string, CLI::Option*> cli_option;
  std::map<std::string, std::function<void(const std::string&)>> setters;
};

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double value = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigInvalid("config key '" + key + "' has a non-numeric value: " + text);
  }
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const unsigned long long value = std::stoull(text, &pos, 0);
    if (pos != text.size() || text.find('-') != std::string::npos) {
      throw std::invalid_argument(text);
    }
    return static_cast<std::size_t>(value);
  } catch (const std::exception&) {
    throw ConfigInvalid("config key '" + key + "' has a non-integer value: " + text);
  }
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t pos = 0;
    const unsigned long long value = std::stoull(text, &pos, 0);
    if (pos != text.size() || text.find('-') != std::string::npos) {
      throw std::invalid_argument(text);
    }
    return static_cast<std::uint64_t>(value);
  } catch (const std::exception&) {
    throw ConfigInvalid("seed must be a decimal or 0x-prefixed unsigned integer, got: " + text);
  }
}

void add_real(CLI::App* cmd, Options& o, const std::string& key, double& target,
              const std::string& help) {
  o.cli_option[key] = cmd->add_option("--" + key, target, help)->capture_default_str();
  o.setters[key] = [key, &target](const std::string& v) { target = parse_real(key, v); };
}

void add_count(CLI::App* cmd, Options& o, const std::string& key, std::size_t& target,
               const std::string& help) {
  o.cli_option[key] = cmd->add_option("--" + key, target, help)->capture_default_str();
  o.setters[key] = [key, &target](const std::string& v) { target = parse_count(key, v); };
}

void add_text(CLI::App* cmd, Options& o, const std::string& key, std::string& target,
              const std::string& help) {
  o.cli_option[key] = cmd->add_option("--" + key, target, help)->capture_default_str();
  o.setters[key] = [&target](const std::string& v) { target = v; };
}

void add_model_flags(CLI::App* cmd, Options& o) {
  add_real(cmd, o, "nu", o.nu, "Exponent of the polynomial model f(x)=|x|^nu, g(x)=sigma*|x|^(nu/2)");
  add_real(cmd, o, "sigma", o.sigma, "Diffusion scale of the polynomial model");
}

void add_sim_flags(CLI::App* cmd, Options& o) {
  add_real(cmd, o, "initial", o.initial,
           "Initial state X_0 (0 is absorbing; positivity analyses require > 0)");
  add_real(cmd, o, "hbar", o.hbar, "Maximum step scale h-bar");
  add_text(cmd, o, "rule", o.rule, "Step rule: floored | unfloored | fixed");
  add_text(cmd, o, "scheme", o.scheme, "Update scheme: strong | normalized");
  add_count(cmd, o, "steps", o.steps, "Maximum number of steps");
  add_real(cmd, o, "max-time", o.max_time, "Stop once accumulated time reaches this value");
  add_real(cmd, o, "explosion-threshold", o.explosion_threshold,
           "|x| at or above this value terminates the trajectory as Exploded");
  add_real(cmd, o, "zero-threshold", o.zero_threshold,
           "|x| below this value counts toward the convergence window");
  add_count(cmd, o, "zero-window", o.zero_window,
            "Consecutive below-threshold steps required for ConvergedToZero");
}

void add_seed_flag(CLI::App* cmd, Options& o) {
  add_text(cmd, o, "seed", o.seed_text, "Master seed (decimal or 0x-prefixed hex)");
}

void add_config_flag(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_file,
                  "Flat key = value file mirroring these flags; explicit flags win");
}

void add_out_flag(CLI::App* cmd, Options& o) {
  add_text(cmd, o, "out", o.out_dir, "Output directory");
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

void apply_config_file(Options& o) {
  if (o.config_file.empty()) return;
  std::ifstream in(o.config_file);
  if (!in) {
    throw IoFailure("cannot read config file: " + o.config_file);
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("config line " + std::to_string(line_no) +
                          " is not 'key = value': " + stripped);
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto setter = o.setters.find(key);
    if (setter == o.setters.end()) {
      throw ConfigInvalid("unknown config key: " + key);
    }
    const auto option = o.cli_option.find(key);
    if (option != o.cli_option.end() && option->second->count() > 0) {
      continue;  // the command line already set this value
    }
    setter->second(value);
  }
}

StepRuleKind parse_rule(const std::string& name) {
  if (name == "floored") return StepRuleKind::FlooredAdaptive;
  if (name == "unfloored") return StepRuleKind::UnflooredAdaptive;
  if (name == "fixed") return StepRuleKind::Fixed;
  throw ConfigInvalid("rule must be floored, unfloored, or fixed, got: " + name);
}

Scheme parse_scheme(const std::string& name) {
  if (name == "strong") return Scheme::StrongEM;
  if (name == "normalized") return Scheme::NormalizedDiscrete;
  throw ConfigInvalid("scheme must be strong or normalized, got: " + name);
}

SimConfig make_sim_config(const Options& o) {
  SimConfig cfg;
  cfg.scheme = parse_scheme(o.scheme);
  cfg.rule = {parse_rule(o.rule), o.hbar};
  cfg.model = CoefficientModel::polynomial(o.nu, o.sigma);
  cfg.initial = o.initial;
  cfg.max_steps = o.steps;
  cfg.max_time = o.max_time;
  cfg.explosion_threshold = o.explosion_threshold;
  cfg.zero_threshold = o.zero_threshold;
  cfg.zero_window = o.zero_window;
  return cfg;
}

NoiseMode mode_for(const SimConfig& cfg) {
  return cfg.scheme == Scheme::StrongEM ? NoiseMode::WienerIncrements
                                        : NoiseMode::IidInnovations;
}

void run_simulate(const Options& o) {
  const SimConfig cfg = make_sim_config(o);
  NoiseSource src = NoiseSource::for_trajectory(parse_seed(o.seed_text), 0, mode_for(cfg));
  const TrajectoryRecord record = run_trajectory(cfg, src);
  if (o.out_dir.empty()) {
    write_trajectory_csv(record, std::cout);
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec || !std::filesystem::is_directory(o.out_dir)) {
    throw IoFailure("cannot create output directory: " + o.out_dir);
  }
  const std::filesystem::path csv = std::filesystem::path(o.out_dir) / "trajectory.csv";
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw IoFailure("cannot open for writing: " + csv.string());
  write_trajectory_csv(record, out);
  if (!out.flush()) throw IoFailure("write failed: " + csv.string());
  std::cout << trajectory_summary(record);
}

void run_ensemble_cmd(const Options& o, bool write_trajectories) {
  ExperimentConfig cfg;
  cfg.sim = make_sim_config(o);
  cfg.trials = o.trials;
  cfg.master_seed = parse_seed(o.seed_text);
  if (!o.out_dir.empty()) {
    cfg.output_dir = o.out_dir;
    cfg.outputs.summary = true;
    cfg.outputs.plot_data = true;
    cfg.outputs.trajectory_csv = write_trajectories;
  } else {
    cfg.outputs.summary = false;
    cfg.outputs.plot_data = false;
    cfg.outputs.trajectory_csv = false;
    if (write_trajectories) {
      throw ConfigInvalid("--write-trajectories requires --out");
    }
  }
  const EnsembleSummary summary = run_ensemble(cfg);
  std::cout << ensemble_summary_text(summary);
}

void run_classify(const Options& o) {
  const CoefficientModel model = CoefficientModel::polynomial(o.nu, o.sigma);
  const StabilityVerdict verdict = classify_stability(model, {});
  char ratio_text[40];
  std::snprintf(ratio_text, sizeof ratio_text, "%g", verdict.ratio_sup);
  std::cout << to_string(verdict.cls) << ", ratio " << ratio_text << '\n';
  switch (verdict.cls) {
    case StabilityClass::AlmostSureStable:
      std::cout << "condition: sup 2f(x)/g(x)^2 < 1 — noise dominates drift and every "
                   "path converges to zero almost surely\n";
      break;
    case StabilityClass::AlmostSureUnstable:
      std::cout << "condition: liminf 2f(x)/g(x)^2 > 1 near zero — drift dominates and "
                   "convergence to zero has probability zero\n";
      break;
    case StabilityClass::Boundary:
      std::cout << "condition: 2f(x)/g(x)^2 = 1 — critical balance, not classified\n";
      break;
    case StabilityClass::Indeterminate:
      std::cout << "condition: probe estimates straddle 1 — neither criterion applies\n";
      break;
  }
}

void run_positivity_bound(const Options& o) {
  PositivityReport report;
  report.epsilon = o.epsilon;
  report.n_steps = o.steps;
  report.h_exact = exact_step_bound(o.epsilon, o.steps);
  report.h_sasvari_chen = sasvari_chen_step_bound(o.epsilon, o.steps);
  // Report the floor a run at the exact bound would enjoy; an unconstrained
  // bound means every h works, whose worst case (h -> infinity) floors at 1/2.
  report.per_step_floor = report.h_exact.unconstrained
                              ? 0.5
                              : normal_cdf(1.0 / std::sqrt(report.h_exact.value));
  std::cout << positivity_report_text(report);
}

void run_positivity_mc(const Options& o) {
  const SimConfig cfg = make_sim_config(o);
  const PositivityReport report =
      mc_positivity(cfg, o.trials, parse_seed(o.seed_text), o.epsilon);
  std::cout << positivity_report_text(report);
}

void run_figures(const Options& o, const std::string& which) {
  if (o.out_dir.empty()) {
    throw ConfigInvalid("figures requires --out");
  }
  const std::uint64_t seed =
      o.cli_option.count("seed") != 0 && o.cli_option.at("seed")->count() > 0
          ? parse_seed(o.seed_text)
          : kDefaultFigureSeed;
  std::vector<std::filesystem::path> written;
  if (which == "unstab" || which == "both") {
    for (auto& path : reproduce_paper_figures(FigureSet::Unstab, o.out_dir, seed)) {
      written.push_back(std::move(path));
    }
  }
  if (which == "stab" || which == "both") {
    for (auto& path : reproduce_paper_figures(FigureSet::Stab, o.out_dir, seed)) {
      written.push_back(std::move(path));
    }
  }
  for (const auto& path : written) {
    std::cout << path.string() << '\n';
  }
}

int run_moments_check(const Options& o) {
  NoiseSource src(parse_seed(o.seed_text), NoiseMode::WienerIncrements);
  const MomentCheckReport report = conditional_moment_check(src, o.h_values, o.samples);
  for (const MomentRow& row : report.rows) {
    std::cout << "h = " << format_real(row.h) << '\n';
    std::cout << "  mean = " << format_real(row.mean) << " (tolerance "
              << format_real(row.mean_tolerance) << "): " << (row.mean_ok ? "pass" : "FAIL")
              << '\n';
    std::cout << "  second_moment = " << format_real(row.second_moment) << " (target "
              << format_real(row.h) << ", tolerance " << format_real(row.second_tolerance)
              << "): " << (row.second_ok ? "pass" : "FAIL") << '\n';
    std::cout << "  abs_third_moment = " << format_real(row.abs_third_moment) << " (bound "
              << format_real(row.third_bound) << "): " << (row.third_ok ? "pass" : "FAIL")
              << '\n';
  }
  std::cout << "all_ok = " << (report.all_ok ? "true" : "false") << '\n';
  return report.all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Adaptive-timestep Euler-Maruyama simulation of scalar SDEs\n"
      "dX = X f(X) dt + X g(X) dW with non-negative coefficients."};
  app.require_subcommand(1);
  int exit_code = 0;

  Options sim_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "Run one trajectory and emit its CSV");
  add_model_flags(simulate, sim_opts);
  add_sim_flags(simulate, sim_opts);
  add_seed_flag(simulate, sim_opts);
  add_out_flag(simulate, sim_opts);
  add_config_flag(simulate, sim_opts);
  simulate->callback([&] {
    apply_config_file(sim_opts);
    run_simulate(sim_opts);
  });

  Options ens_opts;
  bool write_trajectories = false;
  CLI::App* ensemble =
      app.add_subcommand("ensemble", "Run many trajectories and print summary statistics");
  add_model_flags(ensemble, ens_opts);
  add_sim_flags(ensemble, ens_opts);
  add_count(ensemble, ens_opts, "trials", ens_opts.trials, "Number of trajectories");
  add_seed_flag(ensemble, ens_opts);
  add_out_flag(ensemble, ens_opts);
  ensemble->add_flag("--write-trajectories", write_trajectories,
                     "Also write one CSV per trajectory under --out");
  add_config_flag(ensemble, ens_opts);
  ensemble->callback([&] {
    apply_config_file(ens_opts);
    run_ensemble_cmd(ens_opts, write_trajectories);
  });

  Options cls_opts;
  CLI::App* classify =
      app.add_subcommand("classify", "Classify the zero equilibrium from the ratio 2f/g^2");
  add_model_flags(classify, cls_opts);
  add_config_flag(classify, cls_opts);
  classify->callback([&] {
    apply_config_file(cls_opts);
    run_classify(cls_opts);
  });

  Options pb_opts;
  CLI::App* positivity_bound = app.add_subcommand(
      "positivity-bound", "Step-scale bounds keeping N steps positive with high probability");
  add_real(positivity_bound, pb_opts, "epsilon", pb_opts.epsilon,
           "Allowed probability of losing positivity");
  add_count(positivity_bound, pb_opts, "steps", pb_opts.steps, "Number of steps N");
  add_config_flag(positivity_bound, pb_opts);
  positivity_bound->callback([&] {
    apply_config_file(pb_opts);
    run_positivity_bound(pb_opts);
  });

  Options pmc_opts;
  CLI::App* positivity_mc = app.add_subcommand(
      "positivity-mc", "Monte Carlo check of the positivity guarantee for a configuration");
  add_model_flags(positivity_mc, pmc_opts);
  add_sim_flags(positivity_mc, pmc_opts);
  add_count(positivity_mc, pmc_opts, "trials", pmc_opts.trials, "Number of trajectories");
  add_seed_flag(positivity_mc, pmc_opts);
  add_real(positivity_mc, pmc_opts, "epsilon", pmc_opts.epsilon,
           "Allowed probability of losing positivity");
  add_config_flag(positivity_mc, pmc_opts);
  positivity_mc->callback([&] {
    apply_config_file(pmc_opts);
    run_positivity_mc(pmc_opts);
  });

  Options fig_opts;
  std::string figure_set = "both";
  CLI::App* figures =
      app.add_subcommand("figures", "Emit the six reference trajectory/step-size data sets");
  figures
      ->add_option("set", figure_set,
                   "Which set to emit: unstab (sigma 0, 0, 1), stab (sigma 2, 3, 3), or both")
      ->check(CLI::IsMember({"unstab", "stab", "both"}));
  add_seed_flag(figures, fig_opts);
  add_out_flag(figures, fig_opts);
  add_config_flag(figures, fig_opts);
  figures->callback([&] {
    apply_config_file(fig_opts);
    run_figures(fig_opts, figure_set);
  });

  Options mom_opts;
  CLI::App* moments = app.add_subcommand(
      "moments-check", "Verify conditional moments of Wiener increments at several h");
  add_seed_flag(moments, mom_opts);
  add_count(moments, mom_opts, "samples", mom_opts.samples, "Samples per h value");
  moments->add_option("--h-values", mom_opts.h_values, "Step sizes to test")
      ->capture_default_str();
  add_config_flag(moments, mom_opts);
  moments->callback([&] {
    apply_config_file(mom_opts);
    exit_code = run_moments_check(mom_opts);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const OutOfDomain& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const NonPositiveInitial& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const NonPositiveStep& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const NonNegativityViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ZeroDiffusionAtNonzero& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const IoFailure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return exit_code;
}
