#include "clm/profile.hpp"

#include "clm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace clm {

namespace {
constexpr int kValidationGrid = 4096;
constexpr double kNegativityTolerance = 1e-9;
}  // namespace

OrderProfile::OrderProfile(std::string name, std::vector<std::complex<double>> positive,
                           bool trig_polynomial)
    : name_(std::move(name)), positive_(std::move(positive)), trig_polynomial_(trig_polynomial) {
  while (!positive_.empty() && positive_.back() == std::complex<double>(0.0, 0.0)) positive_.pop_back();

  bound_ = 1.0;
  for (const auto& c : positive_) bound_ += 2.0 * std::abs(c);

  min_density_ = 1.0;
  for (int j = 0; j < kValidationGrid; ++j) {
    const double theta = -kPi + kTwoPi * j / kValidationGrid;
    min_density_ = std::min(min_density_, density(theta));
  }
  if (min_density_ < -kNegativityTolerance) {
    std::ostringstream msg;
    msg << "profile '" << name_ << "' is not a density: minimum " << min_density_ << " on the grid";
    throw std::domain_error(msg.str());
  }
}

OrderProfile OrderProfile::uniform() { return {"uniform", {}, true}; }

OrderProfile OrderProfile::one_plus_cos() { return {"one-plus-cos", {{0.5, 0.0}}, true}; }

OrderProfile OrderProfile::from_coefficients(std::string name, std::vector<std::complex<double>> positive,
                                             bool trig_polynomial) {
  return {std::move(name), std::move(positive), trig_polynomial};
}

OrderProfile OrderProfile::preset(const std::string& name) {
  if (name == "uniform") return uniform();
  if (name == "one-plus-cos" || name == "one_plus_cos") return one_plus_cos();
  throw std::invalid_argument("unknown profile preset '" + name + "'");
}

bool OrderProfile::covers(int n) const noexcept {
  return trig_polynomial_ || std::abs(n) <= n_max();
}

std::complex<double> OrderProfile::coeff(int n) const {
  if (n == 0) return {1.0, 0.0};
  const int m = std::abs(n);
  if (m > n_max()) {
    if (trig_polynomial_) return {0.0, 0.0};
    throw std::out_of_range("profile '" + name_ + "' has no coefficient at n = " + std::to_string(n));
  }
  const auto c = positive_[static_cast<std::size_t>(m - 1)];
  return n > 0 ? c : std::conj(c);
}

double OrderProfile::density(double theta) const {
  double value = 1.0;
  for (std::size_t j = 0; j < positive_.size(); ++j) {
    const double n = static_cast<double>(j + 1);
    value += 2.0 * (positive_[j] * std::polar(1.0, n * theta)).real();
  }
  return value;
}

}  // namespace clm
