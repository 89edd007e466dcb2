#pragma once

#include "clm/kernel.hpp"
#include "clm/profile.hpp"
#include "clm/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace clm {

/// Unscaled: total event rate lambda N. Rescaled (time sped up by N):
/// total event rate lambda N^2.
enum class TimeScale { unscaled, rescaled };

std::string to_string(TimeScale mode);
TimeScale parse_time_scale(const std::string& name);

/// Noise scale either given directly or as eps_N = N^{-gamma}.
struct NoiseScale {
  std::optional<double> gamma;
  std::optional<double> epsilon;

  static NoiseScale from_gamma(double gamma) { return {gamma, std::nullopt}; }
  static NoiseScale from_epsilon(double epsilon) { return {std::nullopt, epsilon}; }

  double resolve(int n_particles) const;
};

struct SimParams {
  int n_particles = 2;
  double lambda = 1.0;
  NoiseScale noise = NoiseScale::from_gamma(1.0);
  TimeScale mode = TimeScale::rescaled;
  std::uint64_t seed = 0;
  double t_end = 0.0;
  std::vector<double> snapshot_times;

  double epsilon() const { return noise.resolve(n_particles); }
  double total_rate() const;

  /// Throws std::invalid_argument on inconsistent parameters.
  void validate() const;
};

struct Configuration {
  std::vector<double> angles;
  double clock = 0.0;
};

class InitialCondition {
public:
  enum class Kind { iid, ordered, point_mass };

  static InitialCondition iid(OrderProfile profile) { return {Kind::iid, std::move(profile), 0.0}; }
  static InitialCondition ordered(OrderProfile profile) { return {Kind::ordered, std::move(profile), 0.0}; }
  static InitialCondition point_mass(double theta) {
    return {Kind::point_mass, OrderProfile::uniform(), wrap_angle(theta)};
  }

  Kind kind() const noexcept { return kind_; }
  const OrderProfile& profile() const noexcept { return profile_; }
  double theta0() const noexcept { return theta0_; }

private:
  InitialCondition(Kind kind, OrderProfile profile, double theta0)
      : kind_(kind), profile_(std::move(profile)), theta0_(theta0) {}

  Kind kind_;
  OrderProfile profile_;
  double theta0_;
};

/// One collision: `follower` adopted the angle of `leader` plus noise after
/// waiting `dt`.
struct StepEvent {
  int leader = 0;
  int follower = 0;
  double dt = 0.0;
};

struct Snapshot {
  double time = 0.0;
  Configuration config;
};

Configuration init(const SimParams& params, const InitialCondition& initial, Engine& rng);

StepEvent step(Configuration& config, const SimParams& params, NoiseKernel::Sampler& noise, Engine& rng);
StepEvent step(Configuration& config, const SimParams& params, const NoiseKernel& kernel, Engine& rng);

/// Simulates until the clock passes t_end. Each snapshot holds the state in
/// force at its time (left limit at event instants). An empty snapshot list
/// records t_end only.
std::vector<Snapshot> run(const SimParams& params, const InitialCondition& initial, const NoiseKernel& kernel,
                          Engine& rng);

/// Circular variance 1 - |mean of e^{i theta}|.
double circular_variance(const std::vector<double>& angles);

/// Runs are grouped in fixed chunks so the reduction order, and hence every
/// floating-point result, is independent of the worker count.
inline constexpr std::size_t kEnsembleChunk = 128;

/// Runs `runs` independent trajectories; run r uses make_stream(seed, r).
/// `visit(partial, run, snapshots)` folds one run into a chunk-local partial
/// and `combine(into, from)` merges chunk partials in chunk order.
template <class Partial, class Make, class Visit, class Combine>
Partial run_ensemble(const SimParams& params, const InitialCondition& initial, const NoiseKernel& kernel,
                     std::size_t runs, Make make, Visit visit, Combine combine, unsigned threads = 0) {
  params.validate();
  const std::size_t chunks = (runs + kEnsembleChunk - 1) / kEnsembleChunk;
  std::vector<std::optional<Partial>> partials(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t c = next++; c < chunks; c = next++) {
        Partial partial = make();
        const std::size_t end = std::min(runs, (c + 1) * kEnsembleChunk);
        for (std::size_t r = c * kEnsembleChunk; r < end; ++r) {
          Engine rng = make_stream(params.seed, r);
          visit(partial, r, run(params, initial, kernel, rng));
        }
        partials[c].emplace(std::move(partial));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = chunks;
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(chunks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  Partial total = make();
  for (auto& p : partials) combine(total, std::move(*p));
  return total;
}

}  // namespace clm
