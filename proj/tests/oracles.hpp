#pragma once

// Independent reference solutions for the test suites. Nothing here calls
// into the hierarchy module: the Fourier ODEs are written straight from the
// pair-jump generator and integrated with classical RK4.

#include "clm/coeff_table.hpp"
#include "clm/kernel.hpp"

#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using clm::Tuple;
using cplx = std::complex<double>;

// Right-hand side of one equation: d/dt F(tuple) = self * F(tuple) + sum weight * F(parent).
struct Terms {
  double self = 0.0;
  std::vector<std::pair<double, Tuple>> parents;
};

using TermsFn = std::function<Terms(const Tuple&)>;

// Tuple after particle `follower` copies particle `leader`: the follower's
// frequency moves onto the leader's slot and the follower's slot disappears.
inline Tuple copy_onto(const Tuple& tuple, std::size_t leader, std::size_t follower) {
  Tuple out;
  for (std::size_t l = 0; l < tuple.size(); ++l) {
    if (l == follower) continue;
    out.push_back(l == leader ? tuple[leader] + tuple[follower] : tuple[l]);
  }
  return out;
}

// Finite N, rescaled time. Each ordered pair (leader a, follower b) fires at
// rate lambda N^2 / (N (N-1)). For the k tagged particles:
//   follower tagged, leader tagged   -> g(n_b) F_{k-1}(copy_onto) - F_k
//   follower tagged, leader untagged -> (g(n_b) - 1) F_k, N - k choices
inline TermsFn finite_n(int n_particles, const clm::NoiseKernel& kernel, double lambda) {
  return [=](const Tuple& tuple) {
    const double per_pair = lambda * n_particles / (n_particles - 1.0);
    const auto k = tuple.size();
    Terms terms;
    for (std::size_t b = 0; b < k; ++b) {
      const double g = kernel.fourier_coeff(tuple[b]);
      terms.self += per_pair * (n_particles - static_cast<double>(k)) * (g - 1.0);
      for (std::size_t a = 0; a < k; ++a) {
        if (a == b) continue;
        terms.self -= per_pair;
        terms.parents.emplace_back(per_pair * g, copy_onto(tuple, a, b));
      }
    }
    return terms;
  };
}

// N -> infinity with N eps^2 -> 0: every tagged pair copies at rate lambda
// per ordered pair, noise vanishes.
inline TermsFn strong_limit(double lambda) {
  return [=](const Tuple& tuple) {
    Terms terms;
    for (std::size_t b = 0; b < tuple.size(); ++b) {
      for (std::size_t a = 0; a < tuple.size(); ++a) {
        if (a == b) continue;
        terms.self -= lambda;
        terms.parents.emplace_back(lambda, copy_onto(tuple, a, b));
      }
    }
    return terms;
  };
}

// N eps^2 = 1: the untagged leaders add diffusion -lambda m2 n^2 / 2 per slot.
inline TermsFn balanced_limit(double lambda, double m2) {
  return [=](const Tuple& tuple) {
    Terms terms = strong_limit(lambda)(tuple);
    for (int n : tuple) terms.self -= lambda * m2 * n * n / 2.0;
    return terms;
  };
}

// Unscaled time: only untagged leaders survive, at rate lambda per slot.
inline TermsFn unscaled(const clm::NoiseKernel& kernel, double lambda) {
  return [=](const Tuple& tuple) {
    Terms terms;
    for (int n : tuple) terms.self += lambda * (kernel.fourier_coeff(n) - 1.0);
    return terms;
  };
}

// Linear system closed over every tuple reachable from the requested ones.
class Closure {
public:
  Closure(const std::vector<Tuple>& wanted, const TermsFn& terms_of) {
    std::deque<Tuple> queue(wanted.begin(), wanted.end());
    while (!queue.empty()) {
      Tuple t = std::move(queue.front());
      queue.pop_front();
      if (index_.count(t)) continue;
      index_.emplace(t, states_.size());
      states_.push_back(t);
      Terms terms = terms_of(t);
      for (const auto& [w, parent] : terms.parents) {
        if (!index_.count(parent)) queue.push_back(parent);
      }
      raw_.push_back(std::move(terms));
    }
    rows_.resize(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
      rows_[i].self = raw_[i].self;
      for (const auto& [w, parent] : raw_[i].parents) rows_[i].couplings.emplace_back(w, index_.at(parent));
    }
  }

  std::size_t size() const { return states_.size(); }
  std::size_t index(const Tuple& t) const { return index_.at(t); }

  // Integrates from the initial values with step h and records the state
  // at each time in `times` (which must be multiples of h, ascending).
  std::vector<std::vector<cplx>> integrate(const std::function<cplx(const Tuple&)>& initial,
                                           const std::vector<double>& times, double h) const {
    std::vector<cplx> y(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) y[i] = initial(states_[i]);
    std::vector<std::vector<cplx>> out;
    std::vector<cplx> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    long step = 0;
    for (double target : times) {
      const long until = std::lround(target / h);
      for (; step < until; ++step) {
        rhs(y, k1);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      out.push_back(y);
    }
    return out;
  }

private:
  struct Row {
    double self = 0.0;
    std::vector<std::pair<double, std::size_t>> couplings;
  };

  void rhs(const std::vector<cplx>& y, std::vector<cplx>& dy) const {
    for (std::size_t i = 0; i < y.size(); ++i) {
      cplx v = rows_[i].self * y[i];
      for (const auto& [w, j] : rows_[i].couplings) v += w * y[j];
      dy[i] = v;
    }
  }

  std::map<Tuple, std::size_t> index_;
  std::vector<Tuple> states_;
  std::vector<Terms> raw_;
  std::vector<Row> rows_;
};

// Every tuple of length k with entries in [-n_max, n_max].
inline std::vector<Tuple> lattice(int k, int n_max) {
  std::vector<Tuple> out;
  Tuple t(static_cast<std::size_t>(k), -n_max);
  for (;;) {
    out.push_back(t);
    std::size_t pos = 0;
    while (pos < t.size() && ++t[pos] > n_max) t[pos++] = -n_max;
    if (pos == t.size()) break;
  }
  return out;
}

// Kingman's formula: probability that the coalescent started from k
// singletons sits at the partition with block sizes `sizes` (given the
// number of blocks j = sizes.size()).
inline double kingman_partition_probability(int k, const std::vector<int>& sizes) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  const int j = static_cast<int>(sizes.size());
  double p = fact(k - j) * fact(j) * fact(j - 1) / (fact(k) * fact(k - 1));
  for (int s : sizes) p *= fact(s);
  return p;
}

}  // namespace oracle
