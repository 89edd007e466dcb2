#pragma once

#include <complex>
#include <random>
#include <string>
#include <vector>

namespace clm {

/// Single-particle density on the torus given by its Fourier coefficients,
/// f(theta) = 1 + 2 sum_{n >= 1} Re(c_n e^{i n theta}) w.r.t. d(theta)/(2 pi).
///
/// A profile is either a trigonometric polynomial (coefficients beyond
/// n_max are exactly zero) or a truncated description whose higher
/// coefficients are unknown.
class OrderProfile {
public:
  static OrderProfile uniform();
  static OrderProfile one_plus_cos();

  /// `positive` holds c_1..c_{n_max}. Throws std::domain_error when the
  /// associated density dips below -1e-9 on a 4096-point grid.
  static OrderProfile from_coefficients(std::string name, std::vector<std::complex<double>> positive,
                                        bool trig_polynomial = true);

  /// Preset lookup by CLI name: "uniform" or "one-plus-cos".
  static OrderProfile preset(const std::string& name);

  const std::string& name() const noexcept { return name_; }
  int n_max() const noexcept { return static_cast<int>(positive_.size()); }
  bool is_trig_polynomial() const noexcept { return trig_polynomial_; }

  bool covers(int n) const noexcept;

  /// Coefficient at n; conjugate symmetric, coeff(0) = 1.
  /// Throws std::out_of_range for uncovered n.
  std::complex<double> coeff(int n) const;

  double density(double theta) const;
  double density_bound() const noexcept { return bound_; }
  double min_density_on_grid() const noexcept { return min_density_; }

  template <class Engine>
  double sample(Engine& rng) const;

private:
  OrderProfile(std::string name, std::vector<std::complex<double>> positive, bool trig_polynomial);

  std::string name_;
  std::vector<std::complex<double>> positive_;
  bool trig_polynomial_;
  double bound_ = 1.0;
  double min_density_ = 1.0;
};

// ---------------------------------------------------------------------------

template <class Engine>
double OrderProfile::sample(Engine& rng) const {
  constexpr double pi = 3.14159265358979323846;
  std::uniform_real_distribution<double> angle(-pi, pi);
  if (positive_.empty()) return angle(rng);
  std::uniform_real_distribution<double> unit(0.0, bound_);
  for (;;) {
    const double theta = angle(rng);
    if (unit(rng) <= density(theta)) return theta;
  }
}

}  // namespace clm
