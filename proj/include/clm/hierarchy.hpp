#pragma once

#include "clm/coeff_table.hpp"
#include "clm/exp_sum.hpp"
#include "clm/kernel.hpp"
#include "clm/profile.hpp"

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace clm {

/// Finite N in rescaled time with eps_N taken from the kernel.
struct FiniteN {
  int n_particles;
  NoiseKernel kernel;
  double lambda = 1.0;
};

/// N -> infinity with N eps_N^2 -> 0.
struct StrongLimit {
  double lambda = 1.0;
};

/// N -> infinity with N eps_N^2 = 1; only the second moment of g survives.
struct BalancedLimit {
  double lambda = 1.0;
  double m2 = 1.0;
};

/// Unscaled time, N -> infinity at fixed eps: no pair coupling survives.
struct Unscaled {
  NoiseKernel kernel;
  double lambda = 1.0;
};

using Regime = std::variant<FiniteN, StrongLimit, BalancedLimit, Unscaled>;

std::string describe(const Regime& regime);
double regime_lambda(const Regime& regime);

/// Decay rate of a k-tuple in the hierarchy (nonpositive).
double level_rate(const Regime& regime, std::span<const int> tuple);

/// Weight of the merged tuple (..., n_i + n_j, ...) in the equation for a
/// tuple containing n_i and n_j.
double pair_weight(const Regime& regime, int n_i, int n_j);

/// Tuple with n_j added into position i and position j removed.
Tuple merge_pair(std::span<const int> tuple, std::size_t i, std::size_t j);

/// Initial Fourier data f_k(n, 0) for every level.
class InitialData {
public:
  enum class Kind { chaotic, ordered, tables };

  /// f_k(n_1..n_k) = prod f(n_l).
  static InitialData chaotic(OrderProfile profile);
  /// f_k(n_1..n_k) = f(n_1 + ... + n_k).
  static InitialData ordered(OrderProfile profile);
  /// tables[k-1] holds level k. Throws std::domain_error unless every
  /// table passes the structural checks and setting the trailing index to
  /// zero reproduces the level below.
  static InitialData from_tables(std::vector<CoeffTable> tables);

  Kind kind() const noexcept { return kind_; }
  const OrderProfile& profile() const;
  const std::vector<CoeffTable>& tables() const noexcept { return tables_; }

  /// Empty when the tuple is not covered by the data.
  std::optional<std::complex<double>> value(std::span<const int> tuple) const;

  /// Real-space density of f_k at a point; only chaotic data has one.
  std::optional<double> density(std::span<const double> theta) const;

  std::string describe() const;

private:
  InitialData(Kind kind, std::optional<OrderProfile> profile, std::vector<CoeffTable> tables)
      : kind_(kind), profile_(std::move(profile)), tables_(std::move(tables)) {}

  Kind kind_;
  std::optional<OrderProfile> profile_;
  std::vector<CoeffTable> tables_;
};

/// exp(rate t) f_1(n, 0) with the first-level rate of the regime.
std::complex<double> first_marginal(const Regime& regime, std::complex<double> initial_coeff, int n, double t);

/// Closed form of F_{N,2}(n1, n2, t) given f2 = F_{N,2}(n1, n2, 0) and
/// f1 = F_{N,1}(n1 + n2, 0).
std::complex<double> second_marginal_finiteN(int n_particles, const NoiseKernel& kernel, double lambda,
                                             std::complex<double> f2, std::complex<double> f1, int n1, int n2,
                                             double t);
std::complex<double> second_marginal_finiteN(int n_particles, const NoiseKernel& kernel, double lambda,
                                             const InitialData& initial, int n1, int n2, double t);

/// Exact solution of the hierarchy up to level k_max on |n_i| <= n_max.
///
/// Each tuple's coefficient is held as an ExpChainSum. Merged parent tuples
/// may leave the lattice; profile-based data is defined everywhere, so such
/// parents are solved too, while table data leaves the tuple unavailable.
class HierarchySolution {
public:
  const Regime& regime() const noexcept { return regime_; }
  const InitialData& initial() const noexcept { return initial_; }
  int k_max() const noexcept { return k_max_; }
  int n_max() const noexcept { return n_max_; }

  /// nullptr for unavailable tuples or tuples never visited.
  const ExpChainSum* find(std::span<const int> tuple) const;

  std::optional<std::complex<double>> value(std::span<const int> tuple, double t) const;

  /// Level-k table at time t; unavailable entries are NaN.
  CoeffTable evaluate(int k, double t) const;

  /// Coefficient of one tuple in t^m e^{a t} form.
  ExpPolySum expanded(std::span<const int> tuple) const;

  std::size_t unavailable(int k) const;

private:
  friend HierarchySolution solve_hierarchy(Regime regime, InitialData initial, int k_max, int n_max);
  HierarchySolution(Regime regime, InitialData initial, int k_max, int n_max);

  const std::optional<ExpChainSum>& solve(const Tuple& tuple);

  Regime regime_;
  InitialData initial_;
  int k_max_;
  int n_max_;
  std::vector<std::map<Tuple, std::optional<ExpChainSum>>> levels_;
};

HierarchySolution solve_hierarchy(Regime regime, InitialData initial, int k_max, int n_max);

/// One term of the strong-limit mixture: f_j evaluated on the diagonal set
/// where the angles inside each block coincide.
struct LimitComponent {
  std::vector<std::vector<int>> blocks;
  double weight = 0.0;
};

struct LimitPointReport {
  /// Weight of the undiluted initial term times its density; empty when
  /// the initial f_k has no density.
  std::optional<double> regular_density;
  /// Components whose diagonal set contains the point.
  std::vector<std::size_t> supported_by;
};

/// f_k(t) = sum over set partitions pi of {1..k} of w(pi, t) f_{|pi|} placed
/// on the diagonal of pi. The single-block-per-index partition carries
/// e^{-lambda k (k-1) t}; the rest is the diagonal-concentrated part.
struct LimitMixture {
  int k = 0;
  double t = 0.0;
  std::vector<double> level_weights;  // index j-1: total weight of j-block partitions
  std::vector<LimitComponent> components;
  std::vector<LimitPointReport> points;

  double regular_weight() const { return level_weights.back(); }
  double diagonal_weight() const;
  double total_mass() const;

  /// Fourier coefficient of the mixture, using `initial` for each f_j.
  std::optional<std::complex<double>> fourier(std::span<const int> tuple, const InitialData& initial) const;
};

/// Throws std::domain_error unless the solution is in the strong limit.
LimitMixture limit_density_k(const HierarchySolution& solution, int k, double t,
                             std::span<const std::vector<double>> check_points = {});

/// N -> infinity limit of F_{N,2}(n1, n2, t) in the balanced regime.
std::complex<double> balanced_f2(std::complex<double> f2, std::complex<double> f1, double lambda, double m2, int n1,
                                 int n2, double t);

struct HProfile {
  std::vector<double> theta;
  std::vector<double> value;
  /// coefficients[n-1] = H(n, -n) = 2 / (m2 n^2 + 2)
  std::vector<double> coefficients;
};

/// H(theta) = 1 + 4 sum_{n=1}^{terms} cos(n theta) / (m2 n^2 + 2) on the grid
/// theta_j = -pi + 2 pi j / grid.
HProfile H_profile(double m2, int n_terms, int grid);

/// f(n, t) = exp((g_hat(n) - 1) t) f(n, 0).
std::complex<double> unscaled_meanfield(const NoiseKernel& kernel, std::complex<double> initial_coeff, int n,
                                        double t);

}  // namespace clm
