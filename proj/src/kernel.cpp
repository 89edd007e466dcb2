#include "clm/kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace clm {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kInvSqrt2Pi = 0.39894228040143267794;   // 1/sqrt(2 pi)

double checked_scale(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::domain_error(std::string(what) + " must be a positive finite number");
  }
  return value;
}

}  // namespace

std::string to_string(DensityFamily family) {
  switch (family) {
    case DensityFamily::gaussian: return "gaussian";
    case DensityFamily::laplace: return "laplace";
    case DensityFamily::uniform: return "uniform";
  }
  return "unknown";
}

DensityFamily parse_density_family(const std::string& name) {
  if (name == "gaussian") return DensityFamily::gaussian;
  if (name == "laplace") return DensityFamily::laplace;
  if (name == "uniform") return DensityFamily::uniform;
  throw std::invalid_argument("unknown density family '" + name + "'");
}

BaseDensity::BaseDensity(DensityFamily family, double scale) : family_(family), scale_(scale) {}

BaseDensity BaseDensity::gaussian(double sigma) {
  return {DensityFamily::gaussian, checked_scale(sigma, "gaussian sigma")};
}

BaseDensity BaseDensity::laplace(double b) {
  return {DensityFamily::laplace, checked_scale(b, "laplace scale b")};
}

BaseDensity BaseDensity::uniform(double a) {
  return {DensityFamily::uniform, checked_scale(a, "uniform half-width a")};
}

double BaseDensity::pdf(double x) const {
  switch (family_) {
    case DensityFamily::gaussian: {
      const double z = x / scale_;
      return kInvSqrt2Pi / scale_ * std::exp(-0.5 * z * z);
    }
    case DensityFamily::laplace:
      return std::exp(-std::abs(x) / scale_) / (2.0 * scale_);
    case DensityFamily::uniform:
      return std::abs(x) <= scale_ ? 0.5 / scale_ : 0.0;
  }
  return 0.0;
}

double BaseDensity::moment(int k) const {
  if (k < 0 || k > 4) {
    throw std::domain_error("moment order must be in 0..4, got " + std::to_string(k));
  }
  const double s = scale_;
  switch (family_) {
    case DensityFamily::gaussian: {
      // E|X|^k for N(0, s^2)
      static constexpr double unit[] = {1.0, kSqrt2OverPi, 1.0, 2.0 * kSqrt2OverPi, 3.0};
      return unit[k] * std::pow(s, k);
    }
    case DensityFamily::laplace: {
      static constexpr double factorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};
      return factorial[k] * std::pow(s, k);
    }
    case DensityFamily::uniform:
      return std::pow(s, k) / (k + 1);
  }
  return 0.0;
}

double BaseDensity::fourier_transform(double xi) const {
  const double s = scale_;
  switch (family_) {
    case DensityFamily::gaussian:
      return std::exp(-0.5 * s * s * xi * xi);
    case DensityFamily::laplace:
      return 1.0 / (1.0 + s * s * xi * xi);
    case DensityFamily::uniform: {
      const double z = s * xi;
      return z == 0.0 ? 1.0 : std::sin(z) / z;
    }
  }
  return 0.0;
}

double BaseDensity::effective_support() const {
  switch (family_) {
    case DensityFamily::gaussian: return 40.0 * scale_;
    case DensityFamily::laplace: return 750.0 * scale_;
    case DensityFamily::uniform: return scale_;
  }
  return scale_;
}

std::string BaseDensity::describe() const {
  std::ostringstream out;
  switch (family_) {
    case DensityFamily::gaussian: out << "gaussian(sigma=" << scale_ << ")"; break;
    case DensityFamily::laplace: out << "laplace(b=" << scale_ << ")"; break;
    case DensityFamily::uniform: out << "uniform(a=" << scale_ << ")"; break;
  }
  return out.str();
}

double moment(const BaseDensity& base, int k) { return base.moment(k); }

// ---------------------------------------------------------------------------

struct NoiseKernel::CoeffCache {
  std::shared_mutex mutex;
  std::unordered_map<int, double> values;
};

NoiseKernel::NoiseKernel(BaseDensity base, double epsilon)
    : base_(base),
      epsilon_(checked_scale(epsilon, "kernel epsilon")),
      cutoff_(kPi / epsilon),
      normalizer_(0.0),
      cache_(std::make_shared<CoeffCache>()) {
  normalizer_ = truncated_fourier(0.0);
  if (!(normalizer_ > 0.0)) {
    throw std::domain_error("kernel restriction to the torus carries no mass");
  }
}

double NoiseKernel::truncated_fourier(double xi) const {
  const double s = base_.scale();
  switch (base_.family()) {
    case DensityFamily::uniform: {
      const double upper = std::min(s, cutoff_);
      if (xi == 0.0) return upper / s;
      return std::sin(xi * upper) / (s * xi);
    }
    case DensityFamily::laplace: {
      // (1/b) Re[(e^{cL} - 1)/c] with c = -1/b + i xi
      const std::complex<double> c(-1.0 / s, xi);
      const std::complex<double> value = (std::exp(c * cutoff_) - 1.0) / c;
      return value.real() / s;
    }
    case DensityFamily::gaussian: {
      const double upper = std::min(cutoff_, base_.effective_support());
      auto integrand = [&](double x) { return 2.0 * base_.pdf(x) * std::cos(xi * x); };
      double error = 0.0;
      const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          integrand, 0.0, upper, 15, 1e-13, &error);
      return value;
    }
  }
  return 0.0;
}

double NoiseKernel::fourier_coeff(int n) const {
  if (n == 0) return 1.0;
  const int key = n < 0 ? -n : n;
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
  }
  const double value = truncated_fourier(static_cast<double>(key) * epsilon_) / normalizer_;
  std::unique_lock lock(cache_->mutex);
  cache_->values[key] = value;
  return value;
}

double NoiseKernel::bound_threshold(int k) const {
  return kPi / std::pow(base_.moment(k), 1.0 / k);
}

BoundCheck NoiseKernel::coeff_bound_check(int n, int k) const {
  if (k != 3 && k != 4) {
    throw std::domain_error("coefficient bound is stated for moment order 3 or 4, got " +
                            std::to_string(k));
  }
  const double threshold = bound_threshold(k);
  if (!(epsilon_ < threshold)) {
    std::ostringstream msg;
    msg << "coefficient bound requires epsilon < pi/m_" << k << "^(1/" << k << ") = " << threshold
        << ", got epsilon = " << epsilon_;
    throw std::domain_error(msg.str());
  }
  const double m2 = base_.moment(2);
  const double m3 = base_.moment(3);
  const double mk = base_.moment(k);
  const double scaled = std::abs(static_cast<double>(n)) * epsilon_;
  const double eps_k = std::pow(epsilon_, k);

  BoundCheck check;
  check.n = n;
  check.k = k;
  check.g_hat = fourier_coeff(n);
  check.lhs = std::abs(check.g_hat - 1.0 + 0.5 * m2 * scaled * scaled);
  check.rhs = 2.0 * eps_k * mk / (std::pow(kPi, k) - eps_k * mk) + m3 / 3.0 * scaled * scaled * scaled;
  check.pass = check.lhs <= check.rhs + kBoundSlack;
  return check;
}

double NoiseKernel::density(double theta) const {
  if (theta < -kPi || theta > kPi) return 0.0;
  return kTwoPi * base_.pdf(theta / epsilon_) / (epsilon_ * normalizer_);
}

NoiseKernel::Sampler::Sampler(const NoiseKernel& kernel)
    : family_(kernel.base().family()),
      scale_(kernel.base().scale()),
      epsilon_(kernel.epsilon()),
      cutoff_(kPi / kernel.epsilon()),
      normal_(0.0, 1.0),
      unit_(0.0, 1.0),
      exponential_(1.0) {}

}  // namespace clm
