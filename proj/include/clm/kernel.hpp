#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

namespace clm {

/// Symmetric base densities on the real line with closed-form moments.
enum class DensityFamily { gaussian, laplace, uniform };

std::string to_string(DensityFamily family);
DensityFamily parse_density_family(const std::string& name);

/// A symmetric probability density g on the line.
///
/// The scale parameter is the standard deviation for the Gaussian, the
/// decay length b for the Laplace density e^{-|x|/b}/(2b), and the half-width
/// a for the uniform density on [-a, a].
class BaseDensity {
public:
  static BaseDensity gaussian(double sigma);
  static BaseDensity laplace(double b);
  static BaseDensity uniform(double a);

  DensityFamily family() const noexcept { return family_; }
  double scale() const noexcept { return scale_; }

  double pdf(double x) const;

  /// \int |x|^k g(x) dx for k in 0..4.
  double moment(int k) const;

  /// Untruncated transform \int g(x) e^{-i xi x} dx (real by symmetry).
  double fourier_transform(double xi) const;

  /// Largest |x| at which the density is not negligible in double precision.
  double effective_support() const;

  template <class Engine>
  double sample(Engine& rng) const;

  std::string describe() const;

private:
  BaseDensity(DensityFamily family, double scale);

  DensityFamily family_;
  double scale_;
};

double moment(const BaseDensity& base, int k);

/// Result of checking the small-frequency estimate for one Fourier mode.
struct BoundCheck {
  int n = 0;
  int k = 0;
  double g_hat = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Slack allowed on the coefficient bound to absorb quadrature error.
inline constexpr double kBoundSlack = 1e-8;

/// Noise density g_eps on the torus: g scaled by eps and restricted to
/// [-pi, pi], renormalized with respect to d(theta)/(2 pi).
///
/// Immutable after construction. Fourier coefficients are memoized in a
/// cache shared between copies; concurrent readers are safe.
class NoiseKernel {
public:
  NoiseKernel(BaseDensity base, double epsilon);

  const BaseDensity& base() const noexcept { return base_; }
  double epsilon() const noexcept { return epsilon_; }

  /// \int_{-pi/eps}^{pi/eps} g(x) e^{-i xi x} dx.
  double truncated_fourier(double xi) const;

  /// Torus Fourier coefficient \hat g_eps(n).
  double fourier_coeff(int n) const;

  /// pi / m_k^{1/k}; the coefficient bound needs eps below this.
  double bound_threshold(int k) const;

  /// Checks |g_hat(n) - 1 + m2/2 (n eps)^2| against the moment bound.
  BoundCheck coeff_bound_check(int n, int k) const;

  /// Density of g_eps at theta with respect to d(theta)/(2 pi).
  double density(double theta) const;

  /// Draws from g conditioned on |X| <= pi/eps and returns eps X wrapped
  /// into [-pi, pi).
  template <class Engine>
  double sample(Engine& rng) const;

  /// Sampler that keeps distribution state between draws; use in hot loops.
  class Sampler {
  public:
    explicit Sampler(const NoiseKernel& kernel);

    template <class Engine>
    double operator()(Engine& rng);

  private:
    DensityFamily family_;
    double scale_;
    double epsilon_;
    double cutoff_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> unit_;
    std::exponential_distribution<double> exponential_;
  };

  Sampler sampler() const { return Sampler(*this); }

private:
  struct CoeffCache;

  BaseDensity base_;
  double epsilon_;
  double cutoff_;      // pi / eps
  double normalizer_;  // F_eps(g)(0)
  std::shared_ptr<CoeffCache> cache_;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double theta) {
  if (theta < -3.0 * kPi || theta >= 3.0 * kPi) theta = std::remainder(theta, kTwoPi);
  if (theta >= kPi) theta -= kTwoPi;
  else if (theta < -kPi) theta += kTwoPi;
  // rounding in the shifts above can land exactly on the excluded endpoint
  if (theta >= kPi) theta = -kPi;
  if (theta < -kPi) theta = -kPi;
  return theta;
}

/// Maximum number of rejected draws before sampling gives up.
inline constexpr int kMaxRejections = 1'000'000;

// ---------------------------------------------------------------------------

template <class Engine>
double BaseDensity::sample(Engine& rng) const {
  switch (family_) {
    case DensityFamily::gaussian:
      return std::normal_distribution<double>(0.0, scale_)(rng);
    case DensityFamily::laplace: {
      const double magnitude = std::exponential_distribution<double>(1.0 / scale_)(rng);
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5 ? -magnitude : magnitude;
    }
    case DensityFamily::uniform:
      return std::uniform_real_distribution<double>(-scale_, scale_)(rng);
  }
  return 0.0;
}

template <class Engine>
double NoiseKernel::sample(Engine& rng) const {
  Sampler draw(*this);
  return draw(rng);
}

template <class Engine>
double NoiseKernel::Sampler::operator()(Engine& rng) {
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    double x = 0.0;
    switch (family_) {
      case DensityFamily::gaussian:
        x = scale_ * normal_(rng);
        break;
      case DensityFamily::laplace:
        x = scale_ * exponential_(rng);
        if (unit_(rng) < 0.5) x = -x;
        break;
      case DensityFamily::uniform:
        x = scale_ * (2.0 * unit_(rng) - 1.0);
        break;
    }
    if (x >= -cutoff_ && x <= cutoff_) return wrap_angle(epsilon_ * x);
  }
  throw std::runtime_error("noise sampler exceeded the rejection cap");
}

}  // namespace clm
