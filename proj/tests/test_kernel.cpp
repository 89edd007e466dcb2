#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clm/kernel.hpp"
#include "clm/rng.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <thread>
#include <vector>

using namespace clm;

namespace {

// tanh-sinh, a different rule from the one the kernel uses
template <class F>
double integrate(F f, double lo, double hi) {
  boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(f, lo, hi, 1e-13);
}

std::vector<BaseDensity> families() {
  return {BaseDensity::gaussian(1.0), BaseDensity::laplace(1.0), BaseDensity::uniform(1.0)};
}

double support(const BaseDensity& g) {
  return g.family() == DensityFamily::uniform ? g.scale() : 60.0 * g.scale();
}

}  // namespace

TEST_CASE("moments in closed form") {
  const auto gauss = BaseDensity::gaussian(1.0);
  CHECK(moment(gauss, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(moment(gauss, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(moment(BaseDensity::uniform(1.0), 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(moment(BaseDensity::laplace(2.0), 3) == doctest::Approx(6.0 * 8.0).epsilon(1e-15));
  CHECK_THROWS_AS(moment(gauss, 5), std::domain_error);
  CHECK_THROWS_AS(moment(gauss, -1), std::domain_error);
}

TEST_CASE("moments agree with quadrature") {
  for (const auto& g : {BaseDensity::gaussian(0.7), BaseDensity::laplace(1.3), BaseDensity::uniform(2.0)}) {
    for (int k = 0; k <= 4; ++k) {
      const double q = 2.0 * integrate([&](double x) { return std::pow(x, k) * g.pdf(x); }, 0.0, support(g));
      CHECK(g.moment(k) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("base densities are normalized and symmetric") {
  for (const auto& g : families()) {
    const double mass = 2.0 * integrate([&](double x) { return g.pdf(x); }, 0.0, support(g));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    for (double x = -5.0; x <= 5.0; x += 0.37) CHECK(g.pdf(x) == g.pdf(-x));
  }
  CHECK_THROWS_AS(BaseDensity::gaussian(0.0), std::domain_error);
  CHECK_THROWS_AS(BaseDensity::laplace(-1.0), std::domain_error);
}

TEST_CASE("truncated transform matches quadrature") {
  for (const auto& g : families()) {
    for (double eps : {1.0, 0.3, 0.05}) {
      const NoiseKernel kernel(g, eps);
      const double cutoff = std::min(kPi / eps, support(g));
      for (double xi : {0.0, 0.4, 1.7, 5.0}) {
        const double q = 2.0 * integrate([&](double x) { return g.pdf(x) * std::cos(xi * x); }, 0.0, cutoff);
        CHECK(kernel.truncated_fourier(xi) == doctest::Approx(q).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("truncated transform examples") {
  const NoiseKernel gauss(BaseDensity::gaussian(1.0), 0.1);
  const double f0 = gauss.truncated_fourier(0.0);
  CHECK(f0 > 1.0 - 1e-8);
  CHECK(f0 <= 1.0 + 1e-15);

  const NoiseKernel uniform(BaseDensity::uniform(1.0), 1.0);
  CHECK(uniform.truncated_fourier(kPi) == doctest::Approx(std::sin(kPi) / kPi).scale(1.0).epsilon(1e-15));

  // tiny eps leaves the whole line
  for (const auto& g : families()) {
    const NoiseKernel wide(g, 1e-6);
    for (double xi : {0.3, 1.0, 2.5}) {
      CHECK(wide.truncated_fourier(xi) == doctest::Approx(g.fourier_transform(xi)).scale(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("fourier coefficients") {
  for (const auto& g : families()) {
    for (double eps : {0.5, 0.1, 0.01}) {
      const NoiseKernel kernel(g, eps);
      CHECK(kernel.fourier_coeff(0) == 1.0);
      for (int n = 1; n <= 60; ++n) {
        CHECK(kernel.fourier_coeff(n) == kernel.fourier_coeff(-n));
        CHECK(std::abs(kernel.fourier_coeff(n)) <= 1.0);
      }
    }
  }
  // Gaussian, eps = 0.05, n = 10: 1 - (n eps)^2 / 2 up to O((n eps)^3)
  const NoiseKernel kernel(BaseDensity::gaussian(1.0), 0.05);
  const double g10 = kernel.fourier_coeff(10);
  CHECK(std::abs(g10 - (1.0 - 0.5 * 0.25)) <= std::pow(0.5, 3) / 3.0 * moment(kernel.base(), 3));
  CHECK(kernel.coeff_bound_check(10, 3).pass);
  // here truncation is negligible, so g_hat is the Gaussian transform
  CHECK(g10 == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
}

TEST_CASE("torus density has the same coefficients") {
  for (const auto& g : families()) {
    const NoiseKernel kernel(g, 0.4);
    // even integrand; split where the uniform density jumps
    const double edge = std::min(kPi, 0.4 * support(g));
    auto torus_mean = [&](auto f) {
      double v = integrate([&](double th) { return kernel.density(th) * f(th); }, 0.0, edge);
      if (edge < kPi) v += integrate([&](double th) { return kernel.density(th) * f(th); }, edge, kPi);
      return v / kPi;
    };
    const double mass = torus_mean([](double) { return 1.0; });
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    for (int n = 1; n <= 4; ++n) {
      const double c = torus_mean([n](double th) { return std::cos(n * th); });
      CHECK(kernel.fourier_coeff(n) == doctest::Approx(c).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("coefficient bound") {
  const NoiseKernel kernel(BaseDensity::gaussian(1.0), 0.1);
  const auto zero = kernel.coeff_bound_check(0, 3);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.pass);
  for (int n = -50; n <= 50; ++n) CHECK(kernel.coeff_bound_check(n, 3).pass);

  CHECK_THROWS_AS(kernel.coeff_bound_check(1, 2), std::domain_error);
  CHECK_THROWS_AS(kernel.coeff_bound_check(1, 5), std::domain_error);

  const NoiseKernel coarse(BaseDensity::gaussian(1.0), 3.0);
  CHECK(coarse.bound_threshold(4) == doctest::Approx(kPi / std::pow(3.0, 0.25)));
  CHECK_THROWS_AS(coarse.coeff_bound_check(1, 4), std::domain_error);
  try {
    coarse.coeff_bound_check(1, 3);
    FAIL("expected a domain error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("epsilon <") != std::string::npos);
  }
}

TEST_CASE("line transform estimate") {
  // |F(g)(xi) - 1 + m2 xi^2/2| <= m3 |xi|^3 / 3 and <= m4 xi^4 / 12
  for (const auto& g : families()) {
    const double m2 = g.moment(2), m3 = g.moment(3), m4 = g.moment(4);
    for (double xi = -6.0; xi <= 6.0; xi += 0.05) {
      const double f = 2.0 * integrate([&](double x) { return g.pdf(x) * std::cos(xi * x); }, 0.0, support(g));
      CHECK(f == doctest::Approx(g.fourier_transform(xi)).scale(1.0).epsilon(1e-9));
      const double gap = std::abs(f - 1.0 + 0.5 * m2 * xi * xi);
      CHECK(gap <= m3 / 3.0 * std::pow(std::abs(xi), 3) + 1e-9);
      CHECK(gap <= m4 / 12.0 * std::pow(xi, 4) + 1e-9);
    }
  }
}

TEST_CASE("sampling") {
  Engine rng = make_stream(7, 0);
  const NoiseKernel kernel(BaseDensity::gaussian(1.0), 0.8);
  auto draw = kernel.sampler();
  constexpr int draws = 1'000'000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  std::vector<double> cos_sum(4), cos_sq(4);
  for (int i = 0; i < draws; ++i) {
    const double th = draw(rng);
    REQUIRE(th >= -kPi);
    REQUIRE(th < kPi);
    sum += th;
    sum2 += th * th;
    sum4 += std::pow(th, 4);
    for (int n = 1; n <= 3; ++n) {
      const double c = std::cos(n * th);
      cos_sum[n] += c;
      cos_sq[n] += c * c;
    }
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(var / draws));

  // E theta^2 = eps^2 E[X^2 | |X| <= pi/eps]
  const double c = kPi / 0.8;
  const double mass = integrate([&](double x) { return kernel.base().pdf(x); }, -c, c);
  const double second = 0.64 * integrate([&](double x) { return x * x * kernel.base().pdf(x); }, -c, c) / mass;
  const double se2 = std::sqrt((sum4 / draws - std::pow(sum2 / draws, 2)) / draws);
  CHECK(std::abs(sum2 / draws - second) < 4.0 * se2);

  for (int n = 1; n <= 3; ++n) {
    const double m = cos_sum[n] / draws;
    const double se = std::sqrt((cos_sq[n] / draws - m * m) / draws);
    CHECK(std::abs(m - kernel.fourier_coeff(n)) < 4.0 * se);
  }
}

TEST_CASE("sampling small eps matches coefficients for every family") {
  for (const auto& g : families()) {
    const NoiseKernel kernel(g, 0.5);
    Engine rng = make_stream(11, static_cast<std::uint64_t>(g.family()));
    constexpr int draws = 100'000;
    for (int n = 1; n <= 3; ++n) {
      double s = 0.0, s2 = 0.0;
      Engine local = rng;
      auto draw = kernel.sampler();
      for (int i = 0; i < draws; ++i) {
        const double c = std::cos(n * draw(local));
        s += c;
        s2 += c * c;
      }
      const double m = s / draws;
      CHECK(std::abs(m - kernel.fourier_coeff(n)) < 4.0 * std::sqrt((s2 / draws - m * m) / draws));
    }
  }
}

TEST_CASE("rejection cap") {
  const NoiseKernel hopeless(BaseDensity::uniform(1e13), 1.0);
  Engine rng = make_stream(1, 1);
  CHECK_THROWS_AS(hopeless.sample(rng), std::runtime_error);
}

TEST_CASE("coefficient cache under concurrent readers") {
  const NoiseKernel kernel(BaseDensity::gaussian(1.0), 0.07);
  const NoiseKernel reference(BaseDensity::gaussian(1.0), 0.07);
  std::vector<std::vector<double>> seen(4, std::vector<double>(200));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < 4; ++w) {
      pool.emplace_back([&, w] {
        for (int n = 0; n < 200; ++n) seen[w][n] = kernel.fourier_coeff((n * (w + 1)) % 200);
      });
    }
  }
  for (int w = 0; w < 4; ++w) {
    for (int n = 0; n < 200; ++n) CHECK(seen[w][n] == reference.fourier_coeff((n * (w + 1)) % 200));
  }
}

TEST_CASE("wrap_angle") {
  for (double x : {-100.0, -7.0, -kPi, -1.0, 0.0, 1.0, kPi, 3.5 * kPi, 1e6}) {
    const double w = wrap_angle(x);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    CHECK(std::abs(std::remainder(w - x, kTwoPi)) < 1e-9);
  }
  CHECK(wrap_angle(kPi) == -kPi);
}

TEST_CASE("family names") {
  CHECK(parse_density_family("laplace") == DensityFamily::laplace);
  CHECK(to_string(DensityFamily::uniform) == "uniform");
  CHECK_THROWS_AS(parse_density_family("cauchy"), std::invalid_argument);
}
