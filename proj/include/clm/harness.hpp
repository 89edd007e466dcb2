#pragma once

#include "clm/coeff_table.hpp"
#include "clm/hierarchy.hpp"
#include "clm/kernel.hpp"
#include "clm/marginals.hpp"
#include "clm/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace clm {

BaseDensity make_base_density(DensityFamily family, double param);

/// Parsed `--initial` / config value: "chaotic:<profile>", "ordered:<profile>"
/// or a bare profile name, which means chaotic.
struct InitialSpec {
  bool ordered = false;
  OrderProfile profile = OrderProfile::uniform();

  static InitialSpec parse(const std::string& text);
  InitialCondition condition() const;
  InitialData data() const;
  std::string describe() const;
};

/// Experiment description, read from JSON:
///
///   {"name": "...",
///    "grid": {"n": [32, 128], "gamma": [1.0], "lambda": 1.0,
///             "kernel": {"family": "gaussian", "param": 1.0},
///             "initial": "chaotic:one-plus-cos"},
///    "runs": 1000, "snapshots": [0.5, 1.0], "nmax": 2, "kmax": 2,
///    "seed": 1, "threads": 0}
///
/// `threads` is optional; 0 uses every hardware thread.
struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<int> n_values;
  std::vector<double> gamma_values;
  double lambda = 1.0;
  DensityFamily family = DensityFamily::gaussian;
  double kernel_param = 1.0;
  std::string initial = "chaotic:one-plus-cos";
  std::size_t runs = 100;
  std::vector<double> snapshots;
  int n_max = 2;
  int k_max = 2;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Throws std::invalid_argument when the config cannot be run.
  void validate() const;

  /// Snapshot times with 0 prepended, sorted and deduplicated.
  std::vector<double> times() const;
};

/// Ensemble estimates of levels 1..k_max at each snapshot time of
/// `params`: result[time][k-1].
std::vector<std::vector<CoeffTable>> ensemble_marginals(const SimParams& params, const InitialCondition& initial,
                                                        const NoiseKernel& kernel, std::size_t runs, int k_max,
                                                        int n_max, unsigned threads = 0);

struct Comparison {
  /// One z-score per lattice entry; NaN where either side is unavailable.
  std::vector<double> z;
  /// Entries with zero standard error but a nonzero gap (z = inf).
  std::vector<std::size_t> flagged;
  std::size_t compared = 0;
  double fraction_within_4 = 0.0;
  double median_z = 0.0;
};

/// z = |empirical - analytic| / SE entry by entry.
Comparison compare_mc_analytic(const CoeffTable& empirical, const CoeffTable& analytic);

struct SummaryRow {
  int n_particles = 0;
  double gamma = 0.0;
  double t = 0.0;
  double order_residual = 0.0;
  double chaos_residual = 0.0;
  double diag_gap_n1 = 0.0;
  bool se_flag = false;
};

struct ExperimentReport {
  std::vector<SummaryRow> summary;
  std::vector<std::filesystem::path> files;
  bool complete = false;
};

/// Runs every grid cell and writes per-cell CSVs, summary.csv and
/// manifest.json under `out_dir`. If writing fails the manifest lists the
/// files finished so far with "complete": false and the error is rethrown.
ExperimentReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace clm
