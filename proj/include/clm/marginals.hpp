#pragma once

#include "clm/coeff_table.hpp"
#include "clm/rng.hpp"
#include "clm/simulator.hpp"

#include <span>
#include <vector>

namespace clm {

/// How distinct particle k-tuples are visited within one configuration.
///
/// `exhaustive` averages over every ordered k-tuple of distinct indices. It
/// is evaluated through power sums S(m) = sum_i e^{-i m theta_i} and Moebius
/// inversion over set partitions, so it costs O(N) per configuration.
/// `sampled` draws `tuples_per_config` random distinct tuples instead.
/// `automatic` picks exhaustive for k <= 5.
enum class TupleStrategy { automatic, exhaustive, sampled };

TupleStrategy parse_tuple_strategy(const std::string& name);

struct EstimateOptions {
  int k = 1;
  int n_max = 4;
  int tuples_per_config = 64;
  TupleStrategy strategy = TupleStrategy::automatic;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) noexcept;
  void add(const CompensatedSum& other) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Streams configurations (one per run) into per-entry sums of the per-run
/// estimates and their squares.
class MarginalAccumulator {
public:
  MarginalAccumulator(EstimateOptions options, double t);

  /// `rng` is only drawn from in sampled mode.
  void add_run(std::span<const double> angles, Engine& rng);
  void absorb(const MarginalAccumulator& other);

  std::size_t runs() const noexcept { return runs_; }
  const EstimateOptions& options() const noexcept { return options_; }
  double t() const noexcept { return t_; }

  /// Per-run estimate for one configuration, one value per lattice entry.
  std::vector<std::complex<double>> per_run_estimate(std::span<const double> angles, Engine& rng) const;

  CoeffTable table() const;

private:
  EstimateOptions options_;
  double t_;
  TupleLattice lattice_;
  std::size_t runs_ = 0;
  std::vector<CompensatedSum> sum_re_;
  std::vector<CompensatedSum> sum_im_;
  std::vector<CompensatedSum> sq_re_;
  std::vector<CompensatedSum> sq_im_;
};

/// Empirical k-th marginal coefficient table over an ensemble of
/// configurations sharing one clock value (one configuration per run).
CoeffTable estimate(std::span<const Configuration> snapshots, const EstimateOptions& options, Engine& rng);

/// Pools empirical tables by run counts. Inputs must share k, n_max and t.
CoeffTable merge(std::span<const CoeffTable> tables);

}  // namespace clm
