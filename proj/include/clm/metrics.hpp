#pragma once

#include "clm/coeff_table.hpp"
#include "clm/profile.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace clm {

struct OrderResidual {
  double residual = 0.0;
  std::size_t compared = 0;
  /// Tuples skipped because the profile does not cover their index sum or
  /// the table entry is unavailable.
  std::size_t skipped = 0;
};

/// max |table(n) - profile(n_1 + ... + n_k)| over the lattice.
OrderResidual order_residual(const CoeffTable& table, const OrderProfile& profile);

/// 1 - Re table(n, -n) for n = 1..n_max. Requires k = 2.
std::vector<double> diag_gap(const CoeffTable& table2);

/// max |table2(n1, n2) - table1(n1) table1(n2)|.
double chaos_residual(const CoeffTable& table2, const CoeffTable& table1);

/// max_n |table2(n, -n) - 2/(m2 n^2 + 2)| + max_{n1 + n2 != 0} |table2(n1, n2)|.
double partial_order_residual(const CoeffTable& table2, double m2);

struct DiagnosticsReport {
  int k = 2;
  int n_max = 0;
  double t = 0.0;
  double order_residual = 0.0;
  double chaos_residual = 0.0;
  std::vector<double> diag_gap;
  double partial_order_residual = 0.0;
  /// 4 max SE of the tables involved; zero for analytic tables.
  double noise_floor = 0.0;
  /// Set when the order residual is below the noise floor, i.e. it cannot
  /// be told apart from zero with this many runs.
  bool within_noise = false;
};

DiagnosticsReport diagnose(const CoeffTable& table2, const CoeffTable& table1, const OrderProfile& profile,
                           double m2);

}  // namespace clm
