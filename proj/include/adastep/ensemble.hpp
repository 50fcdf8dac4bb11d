#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adastep/simulator.hpp"

namespace adastep {

/// Which output files an experiment writes.
struct OutputFlags {
  bool trajectory_csv = false;  ///< one CSV per trajectory
  bool summary = true;          ///< summary.txt with the ensemble statistics
  bool plot_data = false;       ///< (t, x) and (n, h) series for trajectory 0
};

/// A reproducible ensemble experiment: per-trajectory streams are derived
/// from master_seed, so results do not depend on scheduling.
struct ExperimentConfig {
  SimConfig sim;
  std::size_t trials = 1;
  std::uint64_t master_seed = 1;
  OutputFlags outputs;
  std::filesystem::path output_dir;
};

/// Aggregate statistics over an ensemble of trajectories.
struct EnsembleSummary {
  std::size_t trials = 0;
  std::map<Verdict, std::size_t> verdict_counts;
  double stability_fraction = 0.0;   ///< fraction ConvergedToZero
  double positivity_fraction = 0.0;  ///< fraction with every state positive
  double mean_step_size = 0.0;       ///< grand mean of all h_n across all trajectories
  double mean_final_time = 0.0;
  /// (q10, q50, q90) of final_time over Exploded trajectories; absent if none.
  std::optional<std::array<double, 3>> explosion_time_quantiles;
};

/// Runs cfg.trials trajectories (bounded worker pool, deterministic
/// index-ordered reduction) and aggregates the summary; optionally writes
/// per-trajectory CSVs, plot data, and summary.txt into cfg.output_dir.
[[nodiscard]] EnsembleSummary run_ensemble(const ExperimentConfig& cfg);

/// Structured text, one `key = value` per line, keys matching the field names
/// (map and quantile entries use dotted subkeys).
[[nodiscard]] std::string ensemble_summary_text(const EnsembleSummary& summary);

enum class FigureSet { Unstab, Stab };

/// Default stream seed for the bundled figure configurations; chosen so the
/// small-step positivity-preserving configuration stays positive throughout.
inline constexpr std::uint64_t kDefaultFigureSeed = 1;

/// Emits plot data for the bundled experiment configurations (all nu = 2,
/// initial 1): Unstab = (sigma=0, h_bar=1), (sigma=0, h_bar=0.1),
/// (sigma=1, h_bar=1) with the step series truncated to the first 100 steps;
/// Stab = (sigma=2, h_bar=1), (sigma=3, h_bar=1), (sigma=3, h_bar=0.1).
/// Each configuration yields <name>_path.csv (t, x over every visited state)
/// and <name>_steps.csv (n, h), with `# key = value` metadata lines first.
/// Returns the written file paths.
std::vector<std::filesystem::path> reproduce_paper_figures(FigureSet which,
                                                           const std::filesystem::path& output_dir,
                                                           std::uint64_t master_seed = kDefaultFigureSeed);

}  // namespace adastep
