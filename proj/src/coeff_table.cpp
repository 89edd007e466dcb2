#include "clm/coeff_table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace clm {

TupleLattice::TupleLattice(int k, int n_max) : k_(k), n_max_(n_max), size_(1) {
  if (k < 1) throw std::invalid_argument("tuple length must be at least 1");
  if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
  const auto width = static_cast<std::size_t>(2 * n_max + 1);
  for (int j = 0; j < k; ++j) {
    if (size_ > std::numeric_limits<std::size_t>::max() / width) throw std::length_error("lattice too large");
    size_ *= width;
  }
}

bool TupleLattice::contains(std::span<const int> tuple) const noexcept {
  if (static_cast<int>(tuple.size()) != k_) return false;
  return std::all_of(tuple.begin(), tuple.end(), [&](int n) { return n >= -n_max_ && n <= n_max_; });
}

std::size_t TupleLattice::index(std::span<const int> tuple) const {
  if (!contains(tuple)) throw std::out_of_range("tuple " + format_tuple(tuple) + " outside the lattice");
  const auto width = static_cast<std::size_t>(2 * n_max_ + 1);
  std::size_t idx = 0;
  for (std::size_t j = tuple.size(); j-- > 0;) idx = idx * width + static_cast<std::size_t>(tuple[j] + n_max_);
  return idx;
}

Tuple TupleLattice::tuple(std::size_t index) const {
  const auto width = static_cast<std::size_t>(2 * n_max_ + 1);
  Tuple out(static_cast<std::size_t>(k_));
  for (auto& n : out) {
    n = static_cast<int>(index % width) - n_max_;
    index /= width;
  }
  return out;
}

void for_each_tuple(const TupleLattice& lattice, const std::function<void(std::size_t, const Tuple&)>& visit) {
  Tuple tuple(static_cast<std::size_t>(lattice.k()), -lattice.n_max());
  for (std::size_t idx = 0; idx < lattice.size(); ++idx) {
    visit(idx, tuple);
    for (auto& n : tuple) {
      if (n < lattice.n_max()) {
        ++n;
        break;
      }
      n = -lattice.n_max();
    }
  }
}

std::string format_tuple(std::span<const int> tuple) {
  std::ostringstream out;
  out << '(';
  for (std::size_t j = 0; j < tuple.size(); ++j) out << (j ? "," : "") << tuple[j];
  out << ')';
  return out.str();
}

// ---------------------------------------------------------------------------

CoeffTable::CoeffTable(int k, int n_max, double t)
    : lattice_(k, n_max), t_(t), values_(lattice_.size(), {0.0, 0.0}) {}

CoeffTable CoeffTable::analytic(int k, int n_max, double t,
                                const std::function<std::complex<double>(std::span<const int>)>& value) {
  CoeffTable table(k, n_max, t);
  for_each_tuple(table.lattice_, [&](std::size_t idx, const Tuple& tuple) { table.values_[idx] = value(tuple); });
  return table;
}

CoeffTable CoeffTable::empirical(int k, int n_max, double t, std::size_t runs, std::vector<std::complex<double>> means,
                                 std::vector<double> var_re, std::vector<double> var_im) {
  CoeffTable table(k, n_max, t);
  if (runs == 0) throw std::invalid_argument("empirical table needs at least one run");
  if (means.size() != table.size() || var_re.size() != table.size() || var_im.size() != table.size()) {
    throw std::invalid_argument("empirical table data does not match the lattice size");
  }
  table.runs_ = runs;
  table.values_ = std::move(means);
  table.var_re_ = std::move(var_re);
  table.var_im_ = std::move(var_im);
  return table;
}

bool CoeffTable::available_at(std::size_t index) const {
  const auto v = values_[index];
  return !std::isnan(v.real()) && !std::isnan(v.imag());
}

std::optional<double> CoeffTable::standard_error_at(std::size_t index) const {
  if (runs_ == 0) return std::nullopt;
  return std::sqrt((var_re_[index] + var_im_[index]) / static_cast<double>(runs_));
}

std::optional<double> CoeffTable::standard_error_re_at(std::size_t index) const {
  if (runs_ == 0) return std::nullopt;
  return std::sqrt(var_re_[index] / static_cast<double>(runs_));
}

std::optional<double> CoeffTable::standard_error_im_at(std::size_t index) const {
  if (runs_ == 0) return std::nullopt;
  return std::sqrt(var_im_[index] / static_cast<double>(runs_));
}

double CoeffTable::max_standard_error() const {
  double worst = 0.0;
  if (runs_ == 0) return worst;
  for (std::size_t i = 0; i < size(); ++i) worst = std::max(worst, *standard_error_at(i));
  return worst;
}

std::vector<std::string> check_invariants(const CoeffTable& table, double abs_tol, double z_tol) {
  std::vector<std::string> problems;
  const auto& lattice = table.lattice();
  auto tolerance = [&](std::size_t a, std::size_t b) {
    double tol = abs_tol;
    if (table.is_empirical()) {
      tol = std::max(tol, z_tol * std::hypot(*table.standard_error_at(a), *table.standard_error_at(b)));
    }
    return tol;
  };

  const Tuple zero(static_cast<std::size_t>(table.k()), 0);
  const std::size_t origin = lattice.index(zero);
  if (table.available_at(origin) && std::abs(table.value_at(origin) - 1.0) > tolerance(origin, origin)) {
    std::ostringstream msg;
    msg << "mass: value at " << format_tuple(zero) << " is " << table.value_at(origin);
    problems.push_back(msg.str());
  }

  for_each_tuple(lattice, [&](std::size_t idx, const Tuple& tuple) {
    if (!table.available_at(idx)) return;
    const std::size_t neg = lattice.negated(idx);
    if (table.available_at(neg) &&
        std::abs(table.value_at(neg) - std::conj(table.value_at(idx))) > tolerance(idx, neg)) {
      problems.push_back("conjugate symmetry fails at " + format_tuple(tuple));
    }
    Tuple swapped = tuple;
    for (std::size_t j = 0; j + 1 < swapped.size(); ++j) {
      std::swap(swapped[j], swapped[j + 1]);
      const std::size_t other = lattice.index(swapped);
      if (table.available_at(other) && std::abs(table.value_at(other) - table.value_at(idx)) > tolerance(idx, other)) {
        problems.push_back("permutation symmetry fails between " + format_tuple(tuple) + " and " +
                           format_tuple(swapped));
      }
      std::swap(swapped[j], swapped[j + 1]);
    }
  });
  return problems;
}

}  // namespace clm
