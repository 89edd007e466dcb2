#include "clm/exp_sum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace clm {

ExpPolySum ExpPolySum::exponential(double rate, std::complex<double> coeff) {
  ExpPolySum sum;
  sum.add_term({coeff, 0, rate});
  return sum;
}

std::complex<double> ExpPolySum::operator()(double t) const {
  std::complex<double> total{0.0, 0.0};
  for (const auto& term : terms_) {
    total += term.coeff * (std::pow(t, term.power) * std::exp(term.rate * t));
  }
  return total;
}

void ExpPolySum::add_term(Term term) {
  if (term.coeff == 0.0) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term, [](const Term& a, const Term& b) {
    return a.rate != b.rate ? a.rate < b.rate : a.power < b.power;
  });
  if (it != terms_.end() && it->rate == term.rate && it->power == term.power) {
    it->coeff += term.coeff;
    if (it->coeff == 0.0) terms_.erase(it);
    return;
  }
  terms_.insert(it, term);
}

ExpPolySum& ExpPolySum::operator+=(const ExpPolySum& other) {
  for (const auto& term : other.terms_) add_term(term);
  return *this;
}

ExpPolySum& ExpPolySum::operator*=(std::complex<double> factor) {
  if (factor == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& term : terms_) term.coeff *= factor;
  return *this;
}

ExpPolySum operator+(ExpPolySum a, const ExpPolySum& b) { return a += b; }
ExpPolySum operator*(std::complex<double> factor, ExpPolySum a) { return a *= factor; }

ExpPolySum ExpPolySum::convolve(double a) const {
  ExpPolySum out;
  for (const auto& term : terms_) {
    const int m = term.power;
    const double b = term.rate;
    if (b == a) {
      out.add_term({term.coeff / static_cast<double>(m + 1), m + 1, a});
      continue;
    }
    // e^{at} \int_0^t s^m e^{(b-a)s} ds with d = b - a
    const double d = b - a;
    double falling = 1.0;  // m! / (m-j)!
    double d_pow = d;      // d^{j+1}
    for (int j = 0; j <= m; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      out.add_term({term.coeff * (sign * falling / d_pow), m - j, b});
      if (j == m) {
        out.add_term({term.coeff * (-sign * falling / d_pow), 0, a});
        break;
      }
      falling *= static_cast<double>(m - j);
      d_pow *= d;
    }
  }
  return out;
}

double ExpPolySum::max_rate() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& term : terms_) worst = std::max(worst, term.rate);
  return worst;
}

// ---------------------------------------------------------------------------

double exp_difference(double a, double b, double t) {
  const double hi = std::max(a, b);
  const double d = hi - std::min(a, b);
  if (d == 0.0) return t * std::exp(hi * t);
  return std::exp(hi * t) * (-std::expm1(-d * t)) / d;
}

namespace {

constexpr std::size_t kMaxNodes = 16;
using Square = std::array<std::array<double, kMaxNodes>, kMaxNodes>;

// Product of lower triangular n x n matrices.
Square lower_product(const Square& a, const Square& b, std::size_t n) {
  Square c{};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t l = j; l <= i; ++l) s += a[i][l] * b[l][j];
      c[i][j] = s;
    }
  }
  return c;
}

}  // namespace

namespace {

// Above this spread * t the recurrence loses at most a small constant factor
// per level; below it the cluster goes to Opitz.
constexpr double kClusterWidth = 2.0;

// Opitz: exp(Z)[p][0] with Z lower bidiagonal, y_i - max y on the diagonal
// and ones below it, times t^p e^{t max x}. The diagonal spread is at most
// kClusterWidth, so only a few squarings are needed. Adding delta I makes
// every Taylor term nonnegative.
double opitz_cluster(std::span<const double> sorted, double t) {
  const std::size_t n = sorted.size();
  if (t == 0.0) return 0.0;
  const double top = sorted.back();
  const double spread = (top - sorted.front()) * t;
  int squarings = 0;
  if (spread + 1.0 > 0.5) squarings = static_cast<int>(std::ceil(std::log2((spread + 1.0) / 0.5)));
  const double scale = std::ldexp(1.0, -squarings);

  Square c{};
  const double delta = spread * scale;
  for (std::size_t i = 0; i < n; ++i) {
    c[i][i] = (sorted[i] - top) * t * scale + delta;
    if (i > 0) c[i][i - 1] = scale;
  }

  Square result{};
  Square power{};
  for (std::size_t i = 0; i < n; ++i) result[i][i] = power[i][i] = 1.0;
  for (int order = 1; order < 60; ++order) {
    power = lower_product(power, c, n);
    double largest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        power[i][j] /= order;
        result[i][j] += power[i][j];
        largest = std::max(largest, power[i][j] / std::max(result[i][j], std::numeric_limits<double>::min()));
      }
    }
    if (largest < 1e-18) break;
  }
  const double shrink = std::exp(-delta);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) result[i][j] *= shrink;
  }
  for (int s = 0; s < squarings; ++s) result = lower_product(result, result, n);
  const double p = static_cast<double>(n - 1);
  return result[n - 1][0] * std::exp(top * t + p * std::log(t));
}

}  // namespace

double exp_divided_difference(std::span<const double> nodes, double t) {
  const std::size_t n = nodes.size();
  if (n == 0) throw std::invalid_argument("divided difference needs at least one node");
  if (t < 0.0) throw std::domain_error("divided difference evaluated at negative time");
  if (n == 1) return std::exp(nodes[0] * t);
  if (n == 2) return exp_difference(nodes[0], nodes[1], t);
  if (n > kMaxNodes) throw std::length_error("too many divided-difference nodes");

  std::array<double, kMaxNodes> x{};
  std::copy(nodes.begin(), nodes.end(), x.begin());
  std::sort(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));

  // Divided-difference table over contiguous ranges [i, j] of the sorted
  // nodes. All entries are positive and the upper range dominates the lower
  // one, so the recurrence only cancels when the range is narrow in t units.
  std::array<std::array<double, kMaxNodes>, kMaxNodes> table{};
  std::array<std::array<bool, kMaxNodes>, kMaxNodes> known{};
  auto entry = [&](auto&& self, std::size_t i, std::size_t j) -> double {
    if (known[i][j]) return table[i][j];
    double v = 0.0;
    if (i == j) {
      v = std::exp(x[i] * t);
    } else if (j == i + 1) {
      v = exp_difference(x[i], x[j], t);
    } else if ((x[j] - x[i]) * t <= kClusterWidth) {
      v = opitz_cluster(std::span<const double>(x.data() + i, j - i + 1), t);
    } else {
      v = (self(self, i + 1, j) - self(self, i, j - 1)) / (x[j] - x[i]);
    }
    known[i][j] = true;
    return table[i][j] = v;
  };
  return entry(entry, 0, n - 1);
}

// ---------------------------------------------------------------------------

ExpChainSum ExpChainSum::exponential(double rate, std::complex<double> coeff) {
  ExpChainSum sum;
  sum.add_term({coeff, {rate}});
  return sum;
}

void ExpChainSum::add_term(Term term) {
  if (term.coeff == 0.0) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term,
                             [](const Term& a, const Term& b) { return a.nodes < b.nodes; });
  if (it != terms_.end() && it->nodes == term.nodes) {
    it->coeff += term.coeff;
    if (it->coeff == 0.0) terms_.erase(it);
    return;
  }
  terms_.insert(it, std::move(term));
}

std::complex<double> ExpChainSum::operator()(double t) const {
  std::complex<double> total{0.0, 0.0};
  for (const auto& term : terms_) total += term.coeff * exp_divided_difference(term.nodes, t);
  return total;
}

void ExpChainSum::add(const ExpChainSum& other, std::complex<double> factor) {
  if (factor == 0.0) return;
  for (const auto& term : other.terms_) add_term({term.coeff * factor, term.nodes});
}

ExpChainSum ExpChainSum::convolve(double a) const {
  ExpChainSum out;
  for (const auto& term : terms_) {
    Term next{term.coeff, term.nodes};
    next.nodes.insert(std::upper_bound(next.nodes.begin(), next.nodes.end(), a), a);
    out.add_term(std::move(next));
  }
  return out;
}

ExpPolySum ExpChainSum::expanded() const {
  ExpPolySum out;
  for (const auto& term : terms_) {
    ExpPolySum piece = ExpPolySum::exponential(term.nodes.front(), term.coeff);
    for (std::size_t i = 1; i < term.nodes.size(); ++i) piece = piece.convolve(term.nodes[i]);
    out += piece;
  }
  return out;
}

}  // namespace clm
