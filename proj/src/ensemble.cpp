#include "adastep/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "adastep/parallel.hpp"

namespace adastep {

namespace {

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

// Linear-interpolation quantile of an ascending-sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double probability) {
  const double rank = probability * static_cast<double>(sorted.size() - 1);
  const std::size_t low = static_cast<std::size_t>(rank);
  if (low + 1 >= sorted.size()) return sorted.back();
  const double fraction = rank - static_cast<double>(low);
  return sorted[low] + (sorted[low + 1] - sorted[low]) * fraction;
}

void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoFailure("cannot create output directory: " + dir.string());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoFailure("cannot open for writing: " + path.string());
  }
  out << content;
  if (!out.flush()) {
    throw IoFailure("write failed: " + path.string());
  }
}

struct TrajectoryStats {
  Verdict verdict = Verdict::HorizonReached;
  double final_time = 0.0;
  double step_sum = 0.0;
  std::size_t step_count = 0;
  bool positive = false;
};

NoiseMode mode_for(const SimConfig& cfg) {
  return cfg.scheme == Scheme::StrongEM ? NoiseMode::WienerIncrements
                                        : NoiseMode::IidInnovations;
}

std::filesystem::path trajectory_csv_path(const std::filesystem::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "traj_%06zu.csv", index);
  return dir / name;
}

void write_plot_series(const std::filesystem::path& dir, const std::string& stem,
                       const SimConfig& cfg, std::uint64_t stream_seed,
                       const TrajectoryRecord& record, std::size_t max_step_rows,
                       std::vector<std::filesystem::path>* written) {
  std::ostringstream meta;
  meta << "# nu = " << format_real(cfg.model.nu()) << '\n';
  meta << "# sigma = " << format_real(cfg.model.sigma()) << '\n';
  meta << "# initial = " << format_real(cfg.initial) << '\n';
  meta << "# hbar = " << format_real(cfg.rule.h_bar) << '\n';
  const char* rule_name = cfg.rule.kind == StepRuleKind::FlooredAdaptive    ? "floored"
                          : cfg.rule.kind == StepRuleKind::UnflooredAdaptive ? "unfloored"
                                                                             : "fixed";
  meta << "# rule = " << rule_name << '\n';
  meta << "# max_steps = " << cfg.max_steps << '\n';
  meta << "# explosion_threshold = " << format_real(cfg.explosion_threshold) << '\n';
  meta << "# zero_threshold = " << format_real(cfg.zero_threshold) << '\n';
  meta << "# zero_window = " << cfg.zero_window << '\n';
  meta << "# stream_seed = " << stream_seed << '\n';
  meta << "# verdict = " << to_string(record.verdict) << '\n';

  std::ostringstream path_series;
  path_series << meta.str() << "t,x\n";
  char line[96];
  for (const StepRow& row : record.steps) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", row.t, row.x);
    path_series << line;
  }
  std::snprintf(line, sizeof line, "%.17g,%.17g\n", record.final_time, record.final_x);
  path_series << line;
  const std::filesystem::path path_file = dir / (stem + "_path.csv");
  write_text_file(path_file, path_series.str());
  if (written) written->push_back(path_file);

  std::ostringstream step_series;
  step_series << meta.str() << "n,h\n";
  const std::size_t rows = std::min(record.steps.size(), max_step_rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", record.steps[i].n, record.steps[i].h);
    step_series << line;
  }
  const std::filesystem::path steps_file = dir / (stem + "_steps.csv");
  write_text_file(steps_file, step_series.str());
  if (written) written->push_back(steps_file);
}

}  // namespace

EnsembleSummary run_ensemble(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) {
    throw ConfigInvalid("run_ensemble requires trials >= 1");
  }
  validate_config(cfg.sim);
  const bool writes_files =
      cfg.outputs.trajectory_csv || cfg.outputs.summary || cfg.outputs.plot_data;
  if (writes_files) {
    if (cfg.output_dir.empty()) {
      throw ConfigInvalid("file outputs are enabled but output_dir is empty");
    }
    ensure_output_dir(cfg.output_dir);
  }

  const NoiseMode mode = mode_for(cfg.sim);
  std::vector<TrajectoryStats> stats(cfg.trials);
  detail::parallel_for_index(cfg.trials, [&](std::size_t index) {
    NoiseSource src = NoiseSource::for_trajectory(cfg.master_seed, index, mode);
    const TrajectoryRecord record = run_trajectory(cfg.sim, src);

    TrajectoryStats& slot = stats[index];
    slot.verdict = record.verdict;
    slot.final_time = record.final_time;
    slot.step_count = record.steps.size();
    for (const StepRow& row : record.steps) slot.step_sum += row.h;
    slot.positive = !record.first_nonpositive_index;

    if (cfg.outputs.trajectory_csv) {
      std::ofstream out(trajectory_csv_path(cfg.output_dir, index), std::ios::binary);
      if (!out) {
        throw IoFailure("cannot open trajectory CSV for writing");
      }
      write_trajectory_csv(record, out);
      if (!out.flush()) {
        throw IoFailure("trajectory CSV write failed");
      }
    }
    if (cfg.outputs.plot_data && index == 0) {
      write_plot_series(cfg.output_dir, "trajectory0", cfg.sim,
                        derive_stream_seed(cfg.master_seed, 0), record,
                        record.steps.size(), nullptr);
    }
  });

  // Deterministic reduction in trajectory-index order.
  EnsembleSummary summary;
  summary.trials = cfg.trials;
  summary.verdict_counts = {{Verdict::ConvergedToZero, 0},
                            {Verdict::Exploded, 0},
                            {Verdict::HorizonReached, 0},
                            {Verdict::StepOverflow, 0}};
  double step_sum = 0.0;
  std::size_t step_count = 0;
  double final_time_sum = 0.0;
  std::size_t positive_count = 0;
  std::vector<double> explosion_times;
  for (const TrajectoryStats& slot : stats) {
    ++summary.verdict_counts[slot.verdict];
    step_sum += slot.step_sum;
    step_count += slot.step_count;
    final_time_sum += slot.final_time;
    positive_count += slot.positive ? 1 : 0;
    if (slot.verdict == Verdict::Exploded) explosion_times.push_back(slot.final_time);
  }

  const double trials = static_cast<double>(cfg.trials);
  summary.stability_fraction =
      static_cast<double>(summary.verdict_counts[Verdict::ConvergedToZero]) / trials;
  summary.positivity_fraction = static_cast<double>(positive_count) / trials;
  summary.mean_step_size = step_count > 0 ? step_sum / static_cast<double>(step_count) : 0.0;
  summary.mean_final_time = final_time_sum / trials;
  if (!explosion_times.empty()) {
    std::sort(explosion_times.begin(), explosion_times.end());
    summary.explosion_time_quantiles = {{sorted_quantile(explosion_times, 0.10),
                                         sorted_quantile(explosion_times, 0.50),
                                         sorted_quantile(explosion_times, 0.90)}};
  }

  if (cfg.outputs.summary) {
    write_text_file(cfg.output_dir / "summary.txt", ensemble_summary_text(summary));
  }
  return summary;
}

std::string ensemble_summary_text(const EnsembleSummary& summary) {
  std::ostringstream out;
  out << "trials = " << summary.trials << '\n';
  for (const auto& [verdict, count] : summary.verdict_counts) {
    out << "verdict_counts." << to_string(verdict) << " = " << count << '\n';
  }
  out << "stability_fraction = " << format_real(summary.stability_fraction) << '\n';
  out << "positivity_fraction = " << format_real(summary.positivity_fraction) << '\n';
  out << "mean_step_size = " << format_real(summary.mean_step_size) << '\n';
  out << "mean_final_time = " << format_real(summary.mean_final_time) << '\n';
  if (summary.explosion_time_quantiles) {
    const auto& q = *summary.explosion_time_quantiles;
    out << "explosion_time_quantiles.q10 = " << format_real(q[0]) << '\n';
    out << "explosion_time_quantiles.q50 = " << format_real(q[1]) << '\n';
    out << "explosion_time_quantiles.q90 = " << format_real(q[2]) << '\n';
  } else {
    out << "explosion_time_quantiles = absent" << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> reproduce_paper_figures(
    FigureSet which, const std::filesystem::path& output_dir, std::uint64_t master_seed) {
  struct FigureConfig {
    const char* stem;
    double sigma;
    double h_bar;
    std::size_t max_step_rows;
    std::uint64_t stream_index;
  };
  // The unstable set truncates step series to the first 100 steps; stream
  // indices are global across both sets so each configuration keeps its own
  // noise stream no matter which set is requested.
  const std::vector<FigureConfig> configs =
      which == FigureSet::Unstab
          ? std::vector<FigureConfig>{{"unstab_sigma0_hbar1", 0.0, 1.0, 100, 0},
                                      {"unstab_sigma0_hbar0p1", 0.0, 0.1, 100, 1},
                                      {"unstab_sigma1_hbar1", 1.0, 1.0, 100, 2}}
          : std::vector<FigureConfig>{{"stab_sigma2_hbar1", 2.0, 1.0, SIZE_MAX, 3},
                                      {"stab_sigma3_hbar1", 3.0, 1.0, SIZE_MAX, 4},
                                      {"stab_sigma3_hbar0p1", 3.0, 0.1, SIZE_MAX, 5}};

  ensure_output_dir(output_dir);
  std::vector<std::filesystem::path> written;
  for (const FigureConfig& figure : configs) {
    SimConfig sim;
    sim.scheme = Scheme::StrongEM;
    sim.rule = {StepRuleKind::FlooredAdaptive, figure.h_bar};
    sim.model = CoefficientModel::polynomial(2.0, figure.sigma);
    sim.initial = 1.0;
    sim.max_steps = 10000;
    sim.explosion_threshold = 1e8;
    sim.zero_threshold = 0.01;
    sim.zero_window = 100;
    sim.assert_step_bounds = true;  // adaptive rule: the bounds must hold

    const std::uint64_t stream_seed = derive_stream_seed(master_seed, figure.stream_index);
    NoiseSource src(stream_seed, NoiseMode::WienerIncrements);
    const TrajectoryRecord record = run_trajectory(sim, src);
    write_plot_series(output_dir, figure.stem, sim, stream_seed, record,
                      figure.max_step_rows, &written);
  }
  return written;
}

}  // namespace adastep
