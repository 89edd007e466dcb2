#include "clm/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clm {

TupleStrategy parse_tuple_strategy(const std::string& name) {
  if (name == "auto" || name == "automatic") return TupleStrategy::automatic;
  if (name == "exhaustive") return TupleStrategy::exhaustive;
  if (name == "sampled") return TupleStrategy::sampled;
  throw std::invalid_argument("unknown tuple strategy '" + name + "'");
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::add(const CompensatedSum& other) noexcept {
  add(other.sum_);
  add(other.compensation_);
}

namespace {

constexpr int kMaxExhaustiveK = 5;

// A set partition of {0..k-1} with its Moebius weight
// prod_B (-1)^{|B|-1} (|B|-1)!.
struct WeightedPartition {
  std::vector<std::vector<int>> blocks;
  double weight = 1.0;
};

void enumerate_partitions(int k, int next, std::vector<std::vector<int>>& blocks,
                          std::vector<WeightedPartition>& out) {
  if (next == k) {
    WeightedPartition p{blocks, 1.0};
    for (const auto& b : blocks) {
      double f = 1.0;
      for (std::size_t j = 2; j < b.size(); ++j) f *= static_cast<double>(j);
      p.weight *= (b.size() % 2 == 0 ? -f : f);
    }
    out.push_back(std::move(p));
    return;
  }
  // index loop: the recursion appends to `blocks`
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].push_back(next);
    enumerate_partitions(k, next + 1, blocks, out);
    blocks[b].pop_back();
  }
  blocks.push_back({next});
  enumerate_partitions(k, next + 1, blocks, out);
  blocks.pop_back();
}

const std::vector<WeightedPartition>& partitions_of(int k) {
  static const auto table = [] {
    std::vector<std::vector<WeightedPartition>> all(kMaxExhaustiveK + 1);
    for (int j = 1; j <= kMaxExhaustiveK; ++j) {
      std::vector<std::vector<int>> blocks;
      enumerate_partitions(j, 0, blocks, all[static_cast<std::size_t>(j)]);
    }
    return all;
  }();
  return table.at(static_cast<std::size_t>(k));
}

bool use_exhaustive(const EstimateOptions& options) {
  switch (options.strategy) {
    case TupleStrategy::exhaustive:
      if (options.k > kMaxExhaustiveK) {
        throw std::invalid_argument("exhaustive tuple enumeration supports k <= 5");
      }
      return true;
    case TupleStrategy::sampled: return false;
    case TupleStrategy::automatic: return options.k <= kMaxExhaustiveK;
  }
  return true;
}

}  // namespace

MarginalAccumulator::MarginalAccumulator(EstimateOptions options, double t)
    : options_(options),
      t_(t),
      lattice_(options.k, options.n_max),
      sum_re_(lattice_.size()),
      sum_im_(lattice_.size()),
      sq_re_(lattice_.size()),
      sq_im_(lattice_.size()) {
  if (options.tuples_per_config < 1) throw std::invalid_argument("tuples_per_config must be at least 1");
  use_exhaustive(options_);
}

std::vector<std::complex<double>> MarginalAccumulator::per_run_estimate(std::span<const double> angles,
                                                                        Engine& rng) const {
  const int k = options_.k;
  const int n_max = options_.n_max;
  const auto n_particles = static_cast<int>(angles.size());
  if (k > n_particles) {
    throw std::domain_error("marginal order k = " + std::to_string(k) + " exceeds N = " +
                            std::to_string(n_particles));
  }
  std::vector<std::complex<double>> out(lattice_.size());

  if (use_exhaustive(options_)) {
    // S(m) for |m| <= k n_max, S(-m) = conj S(m)
    const int reach = k * n_max;
    std::vector<std::complex<double>> power_sum(static_cast<std::size_t>(2 * reach + 1));
    auto at = [&](int m) -> std::complex<double>& { return power_sum[static_cast<std::size_t>(m + reach)]; };
    at(0) = static_cast<double>(n_particles);
    if (reach > 0) {
      std::vector<std::complex<double>> base(angles.size()), running(angles.size(), {1.0, 0.0});
      for (std::size_t i = 0; i < angles.size(); ++i) base[i] = std::polar(1.0, -angles[i]);
      for (int m = 1; m <= reach; ++m) {
        std::complex<double> s{0.0, 0.0};
        for (std::size_t i = 0; i < angles.size(); ++i) {
          running[i] *= base[i];
          s += running[i];
        }
        at(m) = s;
        at(-m) = std::conj(s);
      }
    }
    double falling = 1.0;
    for (int j = 0; j < k; ++j) falling *= static_cast<double>(n_particles - j);

    const auto& partitions = partitions_of(k);
    for_each_tuple(lattice_, [&](std::size_t idx, const Tuple& tuple) {
      std::complex<double> total{0.0, 0.0};
      for (const auto& p : partitions) {
        std::complex<double> term{p.weight, 0.0};
        for (const auto& block : p.blocks) {
          int m = 0;
          for (int j : block) m += tuple[static_cast<std::size_t>(j)];
          term *= at(m);
        }
        total += term;
      }
      out[idx] = total / falling;
    });
    return out;
  }

  const int samples = options_.tuples_per_config;
  std::uniform_int_distribution<int> pick(0, n_particles - 1);
  const auto width = static_cast<std::size_t>(2 * n_max + 1);
  std::vector<int> chosen(static_cast<std::size_t>(k));
  std::vector<std::complex<double>> powers(static_cast<std::size_t>(k) * width);
  for (int s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      int candidate = 0;
      do {
        candidate = pick(rng);
      } while (std::find(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(j), candidate) !=
               chosen.begin() + static_cast<std::ptrdiff_t>(j));
      chosen[j] = candidate;
      const double theta = angles[static_cast<std::size_t>(candidate)];
      for (int m = -n_max; m <= n_max; ++m) {
        powers[j * width + static_cast<std::size_t>(m + n_max)] = std::polar(1.0, -m * theta);
      }
    }
    for_each_tuple(lattice_, [&](std::size_t idx, const Tuple& tuple) {
      std::complex<double> term{1.0, 0.0};
      for (std::size_t j = 0; j < tuple.size(); ++j) {
        term *= powers[j * width + static_cast<std::size_t>(tuple[j] + n_max)];
      }
      out[idx] += term;
    });
  }
  for (auto& v : out) v /= static_cast<double>(samples);
  return out;
}

void MarginalAccumulator::add_run(std::span<const double> angles, Engine& rng) {
  const auto estimate = per_run_estimate(angles, rng);
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double re = estimate[i].real();
    const double im = estimate[i].imag();
    sum_re_[i].add(re);
    sum_im_[i].add(im);
    sq_re_[i].add(re * re);
    sq_im_[i].add(im * im);
  }
  ++runs_;
}

void MarginalAccumulator::absorb(const MarginalAccumulator& other) {
  if (other.options_.k != options_.k || other.options_.n_max != options_.n_max) {
    throw std::domain_error("cannot absorb an accumulator with a different lattice");
  }
  for (std::size_t i = 0; i < sum_re_.size(); ++i) {
    sum_re_[i].add(other.sum_re_[i]);
    sum_im_[i].add(other.sum_im_[i]);
    sq_re_[i].add(other.sq_re_[i]);
    sq_im_[i].add(other.sq_im_[i]);
  }
  runs_ += other.runs_;
}

CoeffTable MarginalAccumulator::table() const {
  if (runs_ == 0) throw std::domain_error("no runs accumulated");
  const double r = static_cast<double>(runs_);
  std::vector<std::complex<double>> means(lattice_.size());
  std::vector<double> var_re(lattice_.size()), var_im(lattice_.size());
  for (std::size_t i = 0; i < lattice_.size(); ++i) {
    const double mre = sum_re_[i].value() / r;
    const double mim = sum_im_[i].value() / r;
    means[i] = {mre, mim};
    var_re[i] = std::max(0.0, sq_re_[i].value() / r - mre * mre);
    var_im[i] = std::max(0.0, sq_im_[i].value() / r - mim * mim);
  }
  return CoeffTable::empirical(options_.k, options_.n_max, t_, runs_, std::move(means), std::move(var_re),
                               std::move(var_im));
}

CoeffTable estimate(std::span<const Configuration> snapshots, const EstimateOptions& options, Engine& rng) {
  if (snapshots.empty()) throw std::invalid_argument("cannot estimate marginals from an empty ensemble");
  const double t = snapshots.front().clock;
  MarginalAccumulator acc(options, t);
  for (const auto& config : snapshots) {
    if (std::abs(config.clock - t) > 1e-12 * std::max(1.0, std::abs(t))) {
      throw std::invalid_argument("ensemble snapshots do not share one time");
    }
    acc.add_run(config.angles, rng);
  }
  return acc.table();
}

CoeffTable merge(std::span<const CoeffTable> tables) {
  if (tables.empty()) throw std::domain_error("nothing to merge");
  const auto& first = tables.front();
  std::size_t total_runs = 0;
  for (const auto& t : tables) {
    if (!t.is_empirical()) throw std::domain_error("only empirical tables can be merged");
    if (t.k() != first.k() || t.n_max() != first.n_max() || t.t() != first.t()) {
      throw std::domain_error("tables to merge must share k, n_max and t");
    }
    total_runs += t.runs();
  }
  const double total = static_cast<double>(total_runs);
  const std::size_t size = first.size();
  std::vector<std::complex<double>> means(size);
  std::vector<double> var_re(size), var_im(size);
  for (std::size_t i = 0; i < size; ++i) {
    CompensatedSum re, im;
    for (const auto& t : tables) {
      const double w = static_cast<double>(t.runs());
      re.add(w * t.value_at(i).real());
      im.add(w * t.value_at(i).imag());
    }
    const double mre = re.value() / total;
    const double mim = im.value() / total;
    CompensatedSum vre, vim;
    for (const auto& t : tables) {
      const double w = static_cast<double>(t.runs());
      const double dre = t.value_at(i).real() - mre;
      const double dim = t.value_at(i).imag() - mim;
      vre.add(w * (t.variance_re()[i] + dre * dre));
      vim.add(w * (t.variance_im()[i] + dim * dim));
    }
    means[i] = {mre, mim};
    var_re[i] = vre.value() / total;
    var_im[i] = vim.value() / total;
  }
  return CoeffTable::empirical(first.k(), first.n_max(), first.t(), total_runs, std::move(means), std::move(var_re),
                               std::move(var_im));
}

}  // namespace clm
