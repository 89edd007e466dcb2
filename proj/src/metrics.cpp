#include "clm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clm {

OrderResidual order_residual(const CoeffTable& table, const OrderProfile& profile) {
  OrderResidual out;
  for_each_tuple(table.lattice(), [&](std::size_t idx, const Tuple& tuple) {
    int sum = 0;
    for (int n : tuple) sum += n;
    if (!table.available_at(idx) || !profile.covers(sum)) {
      ++out.skipped;
      return;
    }
    out.residual = std::max(out.residual, std::abs(table.value_at(idx) - profile.coeff(sum)));
    ++out.compared;
  });
  return out;
}

std::vector<double> diag_gap(const CoeffTable& table2) {
  if (table2.k() != 2) throw std::invalid_argument("diag_gap needs a k=2 table");
  std::vector<double> gaps;
  for (int n = 1; n <= table2.n_max(); ++n) {
    const int tuple[] = {n, -n};
    gaps.push_back(table2.available(tuple) ? 1.0 - table2.value(tuple).real() : std::nan(""));
  }
  return gaps;
}

double chaos_residual(const CoeffTable& table2, const CoeffTable& table1) {
  if (table2.k() != 2 || table1.k() != 1) throw std::invalid_argument("chaos_residual needs k=2 and k=1 tables");
  if (table2.n_max() != table1.n_max() || table2.t() != table1.t()) {
    throw std::invalid_argument("chaos_residual needs tables with matching n_max and t");
  }
  double worst = 0.0;
  for_each_tuple(table2.lattice(), [&](std::size_t idx, const Tuple& tuple) {
    const int a[] = {tuple[0]};
    const int b[] = {tuple[1]};
    if (!table2.available_at(idx) || !table1.available(a) || !table1.available(b)) return;
    worst = std::max(worst, std::abs(table2.value_at(idx) - table1.value(a) * table1.value(b)));
  });
  return worst;
}

double partial_order_residual(const CoeffTable& table2, double m2) {
  if (table2.k() != 2) throw std::invalid_argument("partial_order_residual needs a k=2 table");
  double diagonal = 0.0;
  double off = 0.0;
  for_each_tuple(table2.lattice(), [&](std::size_t idx, const Tuple& tuple) {
    if (!table2.available_at(idx)) return;
    const int n = tuple[0];
    if (tuple[0] + tuple[1] == 0) {
      if (n == 0) return;
      diagonal = std::max(diagonal, std::abs(table2.value_at(idx) - 2.0 / (m2 * n * n + 2.0)));
    } else {
      off = std::max(off, std::abs(table2.value_at(idx)));
    }
  });
  return diagonal + off;
}

DiagnosticsReport diagnose(const CoeffTable& table2, const CoeffTable& table1, const OrderProfile& profile,
                           double m2) {
  DiagnosticsReport report;
  report.k = table2.k();
  report.n_max = table2.n_max();
  report.t = table2.t();
  report.order_residual = order_residual(table2, profile).residual;
  report.chaos_residual = chaos_residual(table2, table1);
  report.diag_gap = diag_gap(table2);
  report.partial_order_residual = partial_order_residual(table2, m2);
  report.noise_floor = 4.0 * std::max(table2.max_standard_error(), table1.max_standard_error());
  report.within_noise = report.order_residual < report.noise_floor;
  return report;
}

}  // namespace clm
