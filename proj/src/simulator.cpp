#include "clm/simulator.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

namespace clm {

std::string to_string(TimeScale mode) {
  return mode == TimeScale::rescaled ? "rescaled" : "unscaled";
}

TimeScale parse_time_scale(const std::string& name) {
  if (name == "rescaled") return TimeScale::rescaled;
  if (name == "unscaled") return TimeScale::unscaled;
  throw std::invalid_argument("unknown time scale '" + name + "'");
}

double NoiseScale::resolve(int n_particles) const {
  if (epsilon) return *epsilon;
  if (gamma) return std::pow(static_cast<double>(n_particles), -*gamma);
  throw std::invalid_argument("noise scale needs gamma or epsilon");
}

double SimParams::total_rate() const {
  const double n = n_particles;
  return mode == TimeScale::rescaled ? lambda * n * n : lambda * n;
}

void SimParams::validate() const {
  if (n_particles < 2) throw std::invalid_argument("simulation needs at least two particles");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (noise.gamma && noise.epsilon) throw std::invalid_argument("give either gamma or epsilon, not both");
  if (noise.gamma && *noise.gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  if (!(epsilon() > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be finite and >= 0");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    const double s = snapshot_times[i];
    if (s < 0.0 || s > t_end) {
      std::ostringstream msg;
      msg << "snapshot time " << s << " outside [0, " << t_end << "]";
      throw std::invalid_argument(msg.str());
    }
    if (i > 0 && s < snapshot_times[i - 1]) throw std::invalid_argument("snapshot times must be sorted");
  }
}

Configuration init(const SimParams& params, const InitialCondition& initial, Engine& rng) {
  if (params.n_particles < 2) throw std::invalid_argument("simulation needs at least two particles");
  Configuration config;
  config.angles.resize(static_cast<std::size_t>(params.n_particles));
  switch (initial.kind()) {
    case InitialCondition::Kind::iid:
      for (auto& theta : config.angles) theta = wrap_angle(initial.profile().sample(rng));
      break;
    case InitialCondition::Kind::ordered: {
      const double theta = wrap_angle(initial.profile().sample(rng));
      std::fill(config.angles.begin(), config.angles.end(), theta);
      break;
    }
    case InitialCondition::Kind::point_mass:
      std::fill(config.angles.begin(), config.angles.end(), initial.theta0());
      break;
  }
  return config;
}

namespace {

// Uniform ordered pair (leader, follower) with leader != follower; this is a
// uniform unordered pair with a uniform choice of follower inside it.
inline StepEvent collide(Configuration& config, int n, NoiseKernel::Sampler& noise, Engine& rng) {
  StepEvent event;
  event.leader = std::uniform_int_distribution<int>(0, n - 1)(rng);
  event.follower = std::uniform_int_distribution<int>(0, n - 2)(rng);
  if (event.follower >= event.leader) ++event.follower;
  const auto leader = static_cast<std::size_t>(event.leader);
  const auto follower = static_cast<std::size_t>(event.follower);
  config.angles[follower] = wrap_angle(config.angles[leader] + noise(rng));
  return event;
}

}  // namespace

StepEvent step(Configuration& config, const SimParams& params, NoiseKernel::Sampler& noise, Engine& rng) {
  if (params.n_particles < 2) throw std::invalid_argument("simulation needs at least two particles");
  const double dt = std::exponential_distribution<double>(params.total_rate())(rng);
  StepEvent event = collide(config, params.n_particles, noise, rng);
  event.dt = dt;
  config.clock += dt;
  return event;
}

StepEvent step(Configuration& config, const SimParams& params, const NoiseKernel& kernel, Engine& rng) {
  auto noise = kernel.sampler();
  return step(config, params, noise, rng);
}

std::vector<Snapshot> run(const SimParams& params, const InitialCondition& initial, const NoiseKernel& kernel,
                          Engine& rng) {
  params.validate();
  std::vector<double> times = params.snapshot_times;
  if (times.empty()) times.push_back(params.t_end);

  Configuration config = init(params, initial, rng);
  auto noise = kernel.sampler();
  std::exponential_distribution<double> waiting(params.total_rate());
  const int n = params.n_particles;

  std::vector<Snapshot> snapshots;
  snapshots.reserve(times.size());
  std::size_t pending = 0;
  while (pending < times.size()) {
    const double next_event = config.clock + waiting(rng);
    while (pending < times.size() && times[pending] < next_event) {
      Snapshot snap{times[pending], config};
      snap.config.clock = times[pending];
      snapshots.push_back(std::move(snap));
      ++pending;
    }
    if (next_event > params.t_end) break;
    collide(config, n, noise, rng);
    config.clock = next_event;
  }
  return snapshots;
}

double circular_variance(const std::vector<double>& angles) {
  if (angles.empty()) return 0.0;
  std::complex<double> sum{0.0, 0.0};
  for (double theta : angles) sum += std::polar(1.0, theta);
  return 1.0 - std::abs(sum) / static_cast<double>(angles.size());
}

}  // namespace clm
