#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clm {

using Tuple = std::vector<int>;

/// Dense indexing of the integer tuples (n_1..n_k) with |n_i| <= n_max.
class TupleLattice {
public:
  TupleLattice(int k, int n_max);

  int k() const noexcept { return k_; }
  int n_max() const noexcept { return n_max_; }
  std::size_t size() const noexcept { return size_; }

  bool contains(std::span<const int> tuple) const noexcept;
  std::size_t index(std::span<const int> tuple) const;
  Tuple tuple(std::size_t index) const;

  /// Index of the negated tuple.
  std::size_t negated(std::size_t index) const noexcept { return size_ - 1 - index; }

private:
  int k_;
  int n_max_;
  std::size_t size_;
};

/// Fourier coefficients of a k-th marginal on a truncated lattice at time t.
///
/// Analytic tables carry values only; entries that could not be computed
/// are NaN and report `available() == false`. Empirical tables also carry
/// the across-run population variances of the real and imaginary parts.
class CoeffTable {
public:
  CoeffTable(int k, int n_max, double t);

  static CoeffTable analytic(int k, int n_max, double t,
                             const std::function<std::complex<double>(std::span<const int>)>& value);

  /// Empirical table from per-entry means and population variances over
  /// `runs` independent per-run estimates.
  static CoeffTable empirical(int k, int n_max, double t, std::size_t runs,
                              std::vector<std::complex<double>> means, std::vector<double> var_re,
                              std::vector<double> var_im);

  int k() const noexcept { return lattice_.k(); }
  int n_max() const noexcept { return lattice_.n_max(); }
  double t() const noexcept { return t_; }
  const TupleLattice& lattice() const noexcept { return lattice_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t runs() const noexcept { return runs_; }
  bool is_empirical() const noexcept { return runs_ > 0; }

  std::complex<double> value(std::span<const int> tuple) const { return values_[lattice_.index(tuple)]; }
  std::complex<double> value_at(std::size_t index) const { return values_[index]; }
  void set_value(std::span<const int> tuple, std::complex<double> v) { values_[lattice_.index(tuple)] = v; }
  void set_value_at(std::size_t index, std::complex<double> v) { values_[index] = v; }

  bool available(std::span<const int> tuple) const { return available_at(lattice_.index(tuple)); }
  bool available_at(std::size_t index) const;

  /// sqrt((Var Re + Var Im) / runs); absent for analytic tables.
  std::optional<double> standard_error(std::span<const int> tuple) const {
    return standard_error_at(lattice_.index(tuple));
  }
  std::optional<double> standard_error_at(std::size_t index) const;
  std::optional<double> standard_error_re_at(std::size_t index) const;
  std::optional<double> standard_error_im_at(std::size_t index) const;
  double max_standard_error() const;

  const std::vector<double>& variance_re() const noexcept { return var_re_; }
  const std::vector<double>& variance_im() const noexcept { return var_im_; }

private:
  TupleLattice lattice_;
  double t_;
  std::size_t runs_ = 0;
  std::vector<std::complex<double>> values_;
  std::vector<double> var_re_;
  std::vector<double> var_im_;
};

/// Violations of mass, conjugate symmetry and permutation symmetry. For
/// empirical tables an entry may also deviate by `z_tol` standard errors.
std::vector<std::string> check_invariants(const CoeffTable& table, double abs_tol, double z_tol = 0.0);

/// Visits every tuple of the lattice in index order.
void for_each_tuple(const TupleLattice& lattice, const std::function<void(std::size_t, const Tuple&)>& visit);

std::string format_tuple(std::span<const int> tuple);

}  // namespace clm
