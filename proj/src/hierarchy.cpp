#include "clm/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace clm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const Regime& regime) {
  std::visit(Overloaded{
                 [](const FiniteN& r) {
                   if (r.n_particles < 2) throw std::invalid_argument("finite-N regime needs N >= 2");
                   if (!(r.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
                 },
                 [](const StrongLimit& r) {
                   if (!(r.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
                 },
                 [](const BalancedLimit& r) {
                   if (!(r.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
                   if (!(r.m2 > 0.0)) throw std::invalid_argument("m2 must be positive");
                 },
                 [](const Unscaled& r) {
                   if (!(r.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
                 },
             },
             regime);
}

}  // namespace

std::string describe(const Regime& regime) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const FiniteN& r) {
                   out << "finite-n(N=" << r.n_particles << ", lambda=" << r.lambda
                       << ", eps=" << r.kernel.epsilon() << ", " << r.kernel.base().describe() << ")";
                 },
                 [&](const StrongLimit& r) { out << "strong-limit(lambda=" << r.lambda << ")"; },
                 [&](const BalancedLimit& r) { out << "balanced-limit(lambda=" << r.lambda << ", m2=" << r.m2 << ")"; },
                 [&](const Unscaled& r) {
                   out << "unscaled(lambda=" << r.lambda << ", eps=" << r.kernel.epsilon() << ", "
                       << r.kernel.base().describe() << ")";
                 },
             },
             regime);
  return out.str();
}

double regime_lambda(const Regime& regime) {
  return std::visit([](const auto& r) { return r.lambda; }, regime);
}

double level_rate(const Regime& regime, std::span<const int> tuple) {
  const double k = static_cast<double>(tuple.size());
  return std::visit(
      Overloaded{
          [&](const FiniteN& r) {
            const double n = r.n_particles;
            const double c = r.lambda * n / (n - 1.0);
            double loss = 0.0;
            for (int m : tuple) loss += 1.0 - r.kernel.fourier_coeff(m);
            return -c * ((n - k) * loss + k * (k - 1.0));
          },
          [&](const StrongLimit& r) { return -r.lambda * k * (k - 1.0); },
          [&](const BalancedLimit& r) {
            double squares = 0.0;
            for (int m : tuple) squares += static_cast<double>(m) * m;
            return -r.lambda * (r.m2 / 2.0 * squares + k * (k - 1.0));
          },
          [&](const Unscaled& r) {
            double gain = 0.0;
            for (int m : tuple) gain += r.kernel.fourier_coeff(m) - 1.0;
            return r.lambda * gain;
          },
      },
      regime);
}

double pair_weight(const Regime& regime, int n_i, int n_j) {
  return std::visit(Overloaded{
                        [&](const FiniteN& r) {
                          const double n = r.n_particles;
                          return r.lambda * n / (n - 1.0) *
                                 (r.kernel.fourier_coeff(n_i) + r.kernel.fourier_coeff(n_j));
                        },
                        [](const StrongLimit& r) { return 2.0 * r.lambda; },
                        [](const BalancedLimit& r) { return 2.0 * r.lambda; },
                        [](const Unscaled&) { return 0.0; },
                    },
                    regime);
}

Tuple merge_pair(std::span<const int> tuple, std::size_t i, std::size_t j) {
  if (i >= tuple.size() || j >= tuple.size() || i == j) throw std::out_of_range("bad merge positions");
  Tuple out(tuple.begin(), tuple.end());
  out[i] += out[j];
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
  return out;
}

// ---------------------------------------------------------------------------

InitialData InitialData::chaotic(OrderProfile profile) { return {Kind::chaotic, std::move(profile), {}}; }

InitialData InitialData::ordered(OrderProfile profile) { return {Kind::ordered, std::move(profile), {}}; }

InitialData InitialData::from_tables(std::vector<CoeffTable> tables) {
  if (tables.empty()) throw std::domain_error("initial data needs at least the first marginal");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& table = tables[i];
    if (table.k() != static_cast<int>(i) + 1) {
      throw std::domain_error("initial table " + std::to_string(i) + " is not level " + std::to_string(i + 1));
    }
    if (table.t() != tables.front().t()) throw std::domain_error("initial tables disagree on t");
    const auto problems = check_invariants(table, 1e-10, 4.0);
    if (!problems.empty()) {
      throw std::domain_error("initial table for k=" + std::to_string(table.k()) + ": " + problems.front());
    }
  }
  for (std::size_t i = 1; i < tables.size(); ++i) {
    const auto& upper = tables[i];
    const auto& lower = tables[i - 1];
    for_each_tuple(upper.lattice(), [&](std::size_t idx, const Tuple& tuple) {
      if (tuple.back() != 0 || !upper.available_at(idx)) return;
      const std::span<const int> head(tuple.data(), tuple.size() - 1);
      if (!lower.lattice().contains(head) || !lower.available(head)) return;
      double tol = 1e-10;
      if (upper.is_empirical() && lower.is_empirical()) {
        tol = std::max(tol, 4.0 * std::hypot(*upper.standard_error_at(idx), *lower.standard_error(head)));
      }
      if (std::abs(upper.value_at(idx) - lower.value(head)) > tol) {
        throw std::domain_error("initial tables are not marginally consistent at " + format_tuple(tuple));
      }
    });
  }
  return {Kind::tables, std::nullopt, std::move(tables)};
}

const OrderProfile& InitialData::profile() const {
  if (!profile_) throw std::logic_error("table-based initial data has no profile");
  return *profile_;
}

std::optional<std::complex<double>> InitialData::value(std::span<const int> tuple) const {
  switch (kind_) {
    case Kind::chaotic: {
      std::complex<double> product{1.0, 0.0};
      for (int n : tuple) {
        if (!profile_->covers(n)) return std::nullopt;
        product *= profile_->coeff(n);
      }
      return product;
    }
    case Kind::ordered: {
      int total = 0;
      for (int n : tuple) total += n;
      if (!profile_->covers(total)) return std::nullopt;
      return profile_->coeff(total);
    }
    case Kind::tables: {
      if (tuple.empty() || tuple.size() > tables_.size()) return std::nullopt;
      const auto& table = tables_[tuple.size() - 1];
      if (!table.lattice().contains(tuple) || !table.available(tuple)) return std::nullopt;
      return table.value(tuple);
    }
  }
  return std::nullopt;
}

std::optional<double> InitialData::density(std::span<const double> theta) const {
  if (kind_ != Kind::chaotic) return std::nullopt;
  double product = 1.0;
  for (double x : theta) product *= profile_->density(x);
  return product;
}

std::string InitialData::describe() const {
  switch (kind_) {
    case Kind::chaotic: return "chaotic:" + profile_->name();
    case Kind::ordered: return "ordered:" + profile_->name();
    case Kind::tables: return "tables(k<=" + std::to_string(tables_.size()) + ")";
  }
  return "";
}

// ---------------------------------------------------------------------------

std::complex<double> first_marginal(const Regime& regime, std::complex<double> initial_coeff, int n, double t) {
  validate(regime);
  if (n == 0) return initial_coeff;
  const int tuple[] = {n};
  return std::exp(level_rate(regime, tuple) * t) * initial_coeff;
}

std::complex<double> second_marginal_finiteN(int n_particles, const NoiseKernel& kernel, double lambda,
                                             std::complex<double> f2, std::complex<double> f1, int n1, int n2,
                                             double t) {
  if (n_particles < 2) throw std::invalid_argument("second marginal needs N >= 2");
  const double n = n_particles;
  const double g1 = kernel.fourier_coeff(n1);
  const double g2 = kernel.fourier_coeff(n2);
  const double g12 = kernel.fourier_coeff(n1 + n2);
  const double c = lambda * n / (n - 1.0);
  const double alpha = -c * ((n - 2.0) * ((1.0 - g1) + (1.0 - g2)) + 2.0);
  const double beta = -lambda * n * (1.0 - g12);
  return std::exp(alpha * t) * f2 + c * (g1 + g2) * exp_difference(alpha, beta, t) * f1;
}

std::complex<double> second_marginal_finiteN(int n_particles, const NoiseKernel& kernel, double lambda,
                                             const InitialData& initial, int n1, int n2, double t) {
  const int pair[] = {n1, n2};
  const int merged[] = {n1 + n2};
  const auto f2 = initial.value(pair);
  const auto f1 = initial.value(merged);
  if (!f2 || !f1) throw std::domain_error("initial data does not cover " + format_tuple(pair));
  return second_marginal_finiteN(n_particles, kernel, lambda, *f2, *f1, n1, n2, t);
}

// ---------------------------------------------------------------------------

HierarchySolution::HierarchySolution(Regime regime, InitialData initial, int k_max, int n_max)
    : regime_(std::move(regime)),
      initial_(std::move(initial)),
      k_max_(k_max),
      n_max_(n_max),
      levels_(static_cast<std::size_t>(std::max(k_max, 0))) {}

const std::optional<ExpChainSum>& HierarchySolution::solve(const Tuple& tuple) {
  auto& level = levels_[tuple.size() - 1];
  if (auto it = level.find(tuple); it != level.end()) return it->second;

  std::optional<ExpChainSum> result;
  if (const auto init = initial_.value(tuple)) {
    const double rate = level_rate(regime_, tuple);
    ExpChainSum sum = ExpChainSum::exponential(rate, *init);
    ExpChainSum parents;
    bool covered = true;
    for (std::size_t i = 0; i < tuple.size() && covered; ++i) {
      for (std::size_t j = i + 1; j < tuple.size(); ++j) {
        const double w = pair_weight(regime_, tuple[i], tuple[j]);
        if (w == 0.0) continue;
        const auto& parent = solve(merge_pair(tuple, i, j));
        if (!parent) {
          covered = false;
          break;
        }
        parents.add(*parent, w);
      }
    }
    if (covered) {
      sum.add(parents.convolve(rate));
      result = std::move(sum);
    }
  }
  return level.emplace(tuple, std::move(result)).first->second;
}

const ExpChainSum* HierarchySolution::find(std::span<const int> tuple) const {
  if (tuple.empty() || tuple.size() > levels_.size()) return nullptr;
  const auto& level = levels_[tuple.size() - 1];
  const auto it = level.find(Tuple(tuple.begin(), tuple.end()));
  if (it == level.end() || !it->second) return nullptr;
  return &*it->second;
}

std::optional<std::complex<double>> HierarchySolution::value(std::span<const int> tuple, double t) const {
  const auto* sum = find(tuple);
  if (!sum) return std::nullopt;
  return (*sum)(t);
}

CoeffTable HierarchySolution::evaluate(int k, double t) const {
  if (k < 1 || k > k_max_) throw std::out_of_range("level " + std::to_string(k) + " was not solved");
  if (t < 0.0) throw std::domain_error("solutions are defined for t >= 0");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return CoeffTable::analytic(k, n_max_, t, [&](std::span<const int> tuple) -> std::complex<double> {
    const auto v = value(tuple, t);
    return v ? *v : std::complex<double>{nan, nan};
  });
}

ExpPolySum HierarchySolution::expanded(std::span<const int> tuple) const {
  const auto* sum = find(tuple);
  if (!sum) throw std::out_of_range("no solution for " + format_tuple(tuple));
  return sum->expanded();
}

std::size_t HierarchySolution::unavailable(int k) const {
  if (k < 1 || k > k_max_) throw std::out_of_range("level " + std::to_string(k) + " was not solved");
  std::size_t count = 0;
  for_each_tuple(TupleLattice(k, n_max_), [&](std::size_t, const Tuple& tuple) {
    if (!find(tuple)) ++count;
  });
  return count;
}

HierarchySolution solve_hierarchy(Regime regime, InitialData initial, int k_max, int n_max) {
  validate(regime);
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
  if (const auto* finite = std::get_if<FiniteN>(&regime); finite && k_max > finite->n_particles) {
    throw std::domain_error("k_max exceeds the number of particles");
  }
  if (initial.kind() == InitialData::Kind::tables && static_cast<int>(initial.tables().size()) < k_max) {
    throw std::domain_error("initial tables stop below k_max");
  }
  HierarchySolution solution(std::move(regime), std::move(initial), k_max, n_max);
  for (int k = 1; k <= k_max; ++k) {
    for_each_tuple(TupleLattice(k, n_max), [&](std::size_t, const Tuple& tuple) { solution.solve(tuple); });
  }
  return solution;
}

// ---------------------------------------------------------------------------

namespace {

using Partition = std::vector<std::vector<int>>;

void canonicalize(Partition& p) {
  for (auto& block : p) std::sort(block.begin(), block.end());
  std::sort(p.begin(), p.end());
}

// Distribution over set partitions reached by merging a uniformly chosen
// pair of blocks at each step, starting from singletons. result[j-1] holds
// the partitions with j blocks.
std::vector<std::map<Partition, double>> merge_histories(int k) {
  std::vector<std::map<Partition, double>> levels(static_cast<std::size_t>(k));
  Partition start;
  for (int i = 0; i < k; ++i) start.push_back({i});
  levels[static_cast<std::size_t>(k - 1)][start] = 1.0;
  for (int l = k; l >= 2; --l) {
    const double pairs = l * (l - 1) / 2.0;
    auto& below = levels[static_cast<std::size_t>(l - 2)];
    for (const auto& [partition, prob] : levels[static_cast<std::size_t>(l - 1)]) {
      for (std::size_t a = 0; a < partition.size(); ++a) {
        for (std::size_t b = a + 1; b < partition.size(); ++b) {
          Partition next = partition;
          next[a].insert(next[a].end(), next[b].begin(), next[b].end());
          next.erase(next.begin() + static_cast<std::ptrdiff_t>(b));
          canonicalize(next);
          below[next] += prob / pairs;
        }
      }
    }
  }
  return levels;
}

double circle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

double LimitMixture::diagonal_weight() const {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < level_weights.size(); ++j) total += level_weights[j];
  return total;
}

double LimitMixture::total_mass() const {
  double total = 0.0;
  for (double w : level_weights) total += w;
  return total;
}

std::optional<std::complex<double>> LimitMixture::fourier(std::span<const int> tuple,
                                                          const InitialData& initial) const {
  if (static_cast<int>(tuple.size()) != k) throw std::invalid_argument("tuple length does not match k");
  std::complex<double> total{0.0, 0.0};
  for (const auto& component : components) {
    Tuple sums;
    for (const auto& block : component.blocks) {
      int s = 0;
      for (int i : block) s += tuple[static_cast<std::size_t>(i)];
      sums.push_back(s);
    }
    const auto v = initial.value(sums);
    if (!v) return std::nullopt;
    total += component.weight * *v;
  }
  return total;
}

LimitMixture limit_density_k(const HierarchySolution& solution, int k, double t,
                             std::span<const std::vector<double>> check_points) {
  const auto* strong = std::get_if<StrongLimit>(&solution.regime());
  if (!strong) throw std::domain_error("limit mixture needs a strong-limit solution");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (t < 0.0) throw std::domain_error("mixture defined for t >= 0");
  const double lambda = strong->lambda;

  LimitMixture mixture;
  mixture.k = k;
  mixture.t = t;
  mixture.level_weights.resize(static_cast<std::size_t>(k));
  auto decay = [&](int l) { return lambda * l * (l - 1.0); };
  for (int j = 1; j <= k; ++j) {
    std::vector<double> nodes;
    double factor = 1.0;
    for (int l = k; l >= j; --l) {
      nodes.push_back(-decay(l));
      if (l > j) factor *= decay(l);
    }
    std::sort(nodes.begin(), nodes.end());
    mixture.level_weights[static_cast<std::size_t>(j - 1)] = factor * exp_divided_difference(nodes, t);
  }

  const auto histories = merge_histories(k);
  for (int j = k; j >= 1; --j) {
    for (const auto& [partition, prob] : histories[static_cast<std::size_t>(j - 1)]) {
      mixture.components.push_back({partition, mixture.level_weights[static_cast<std::size_t>(j - 1)] * prob});
    }
  }

  for (const auto& point : check_points) {
    if (static_cast<int>(point.size()) != k) throw std::invalid_argument("check point has the wrong dimension");
    LimitPointReport report;
    if (const auto d = solution.initial().density(point)) report.regular_density = mixture.regular_weight() * *d;
    for (std::size_t c = 0; c < mixture.components.size(); ++c) {
      bool on_diagonal = true;
      for (const auto& block : mixture.components[c].blocks) {
        for (int i : block) {
          if (circle_distance(point[static_cast<std::size_t>(i)], point[static_cast<std::size_t>(block.front())]) >
              1e-12) {
            on_diagonal = false;
          }
        }
      }
      if (on_diagonal) report.supported_by.push_back(c);
    }
    mixture.points.push_back(std::move(report));
  }
  return mixture;
}

// ---------------------------------------------------------------------------

std::complex<double> balanced_f2(std::complex<double> f2, std::complex<double> f1, double lambda, double m2, int n1,
                                 int n2, double t) {
  if (!(m2 > 0.0)) throw std::invalid_argument("m2 must be positive");
  const double a = -lambda * (m2 / 2.0 * (double(n1) * n1 + double(n2) * n2) + 2.0);
  const double sum = n1 + n2;
  const double b = -lambda * m2 / 2.0 * sum * sum;
  return std::exp(a * t) * f2 + 2.0 * lambda * exp_difference(a, b, t) * f1;
}

HProfile H_profile(double m2, int n_terms, int grid) {
  if (n_terms < 1) throw std::invalid_argument("H profile needs at least one term");
  if (grid < 1) throw std::invalid_argument("H profile grid must have at least one point");
  if (!(m2 > 0.0)) throw std::invalid_argument("m2 must be positive");
  HProfile h;
  h.coefficients.resize(static_cast<std::size_t>(n_terms));
  for (int n = 1; n <= n_terms; ++n) h.coefficients[static_cast<std::size_t>(n - 1)] = 2.0 / (m2 * n * n + 2.0);
  h.theta.resize(static_cast<std::size_t>(grid));
  h.value.resize(static_cast<std::size_t>(grid));
  for (int j = 0; j < grid; ++j) {
    const double theta = -kPi + kTwoPi * j / grid;
    double s = 0.0;
    // smallest terms first
    for (int n = n_terms; n >= 1; --n) s += h.coefficients[static_cast<std::size_t>(n - 1)] * std::cos(n * theta);
    h.theta[static_cast<std::size_t>(j)] = theta;
    h.value[static_cast<std::size_t>(j)] = 1.0 + 2.0 * s;
  }
  return h;
}

std::complex<double> unscaled_meanfield(const NoiseKernel& kernel, std::complex<double> initial_coeff, int n,
                                        double t) {
  if (n == 0) return initial_coeff;
  return std::exp((kernel.fourier_coeff(n) - 1.0) * t) * initial_coeff;
}

}  // namespace clm
