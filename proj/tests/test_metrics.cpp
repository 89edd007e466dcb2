#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clm/hierarchy.hpp"
#include "clm/marginals.hpp"
#include "clm/metrics.hpp"

#include <cmath>

using namespace clm;

namespace {

CoeffTable ordered_table(const OrderProfile& p, int k, int n_max, double t = 0.0) {
  return CoeffTable::analytic(k, n_max, t, [&](std::span<const int> tuple) {
    int s = 0;
    for (int n : tuple) s += n;
    return p.coeff(s);
  });
}

CoeffTable product_table(const OrderProfile& p, int k, int n_max, double t = 0.0) {
  return CoeffTable::analytic(k, n_max, t, [&](std::span<const int> tuple) {
    std::complex<double> v{1.0, 0.0};
    for (int n : tuple) v *= p.coeff(n);
    return v;
  });
}

}  // namespace

TEST_CASE("order residual") {
  const auto profile = OrderProfile::from_coefficients("skew", {{0.3, 0.2}, {0.1, -0.05}});
  for (int k = 1; k <= 4; ++k) {
    const auto r = order_residual(ordered_table(profile, k, 2), profile);
    CHECK(r.residual < 1e-12);
    CHECK(r.skipped == 0);
  }

  // strong limit from chaos closes in on the ordered state
  const auto cosine = OrderProfile::one_plus_cos();
  const auto solution = solve_hierarchy(StrongLimit{1.0}, InitialData::chaotic(cosine), 3, 2);
  for (double t : {0.5, 1.0, 2.0}) {
    CHECK(order_residual(solution.evaluate(2, t), cosine).residual <= 2.0 * std::exp(-2.0 * t) + 1e-12);
    CHECK(order_residual(solution.evaluate(3, t), cosine).residual <= 5.0 * std::exp(-2.0 * t) + 1e-12);
  }

  // independent uniform particles sit far from order
  std::vector<Configuration> ensemble;
  for (std::size_t r = 0; r < 500; ++r) {
    Engine rng = make_stream(31, r);
    Configuration c;
    for (int i = 0; i < 50; ++i) c.angles.push_back(OrderProfile::uniform().sample(rng));
    ensemble.push_back(std::move(c));
  }
  Engine rng = make_stream(31, 1u << 20);
  const auto table = estimate(ensemble, {2, 1}, rng);
  const auto r = order_residual(table, OrderProfile::uniform());
  CHECK(r.residual == doctest::Approx(1.0).epsilon(0.05));

  // a truncated profile cannot judge tuples whose sum it lacks
  const auto partial = OrderProfile::from_coefficients("short", {{0.2, 0.0}}, false);
  const auto limited = order_residual(ordered_table(cosine, 2, 1), partial);
  CHECK(limited.skipped == 2);  // (1, 1) and (-1, -1)
  CHECK(limited.compared == 7);
}

TEST_CASE("diag gap") {
  const auto cosine = OrderProfile::one_plus_cos();
  for (double g : diag_gap(ordered_table(cosine, 2, 4))) CHECK(g == doctest::Approx(0.0).scale(1.0));
  for (double g : diag_gap(product_table(OrderProfile::uniform(), 2, 4))) CHECK(g == 1.0);

  const auto balanced = solve_hierarchy(BalancedLimit{1.0, 1.0}, InitialData::chaotic(cosine), 2, 3);
  const auto late = diag_gap(balanced.evaluate(2, 50.0));
  CHECK(late[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const auto gaps = diag_gap(balanced.evaluate(2, t));
    for (int n = 1; n <= 3; ++n) {
      const double q = n * n;
      CHECK(gaps[n - 1] >= q / (q + 2.0) * (1.0 - std::exp(-2.0 * t)) - 1e-12);
    }
  }
  CHECK_THROWS_AS(diag_gap(product_table(cosine, 3, 1)), std::invalid_argument);
}

TEST_CASE("chaos residual") {
  const auto cosine = OrderProfile::one_plus_cos();
  CHECK(chaos_residual(product_table(cosine, 2, 3), product_table(cosine, 1, 3)) < 1e-12);
  CHECK(chaos_residual(ordered_table(cosine, 2, 2), ordered_table(cosine, 1, 2)) >= 0.75);

  const auto balanced = solve_hierarchy(BalancedLimit{1.0, 1.0}, InitialData::chaotic(cosine), 2, 2);
  for (double t : {0.1, 1.0, 5.0}) {
    CHECK(chaos_residual(balanced.evaluate(2, t), balanced.evaluate(1, t)) > 0.0);
  }
  CHECK_THROWS_AS(chaos_residual(product_table(cosine, 2, 2), product_table(cosine, 1, 2, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(chaos_residual(product_table(cosine, 2, 2), product_table(cosine, 1, 3)), std::invalid_argument);
}

TEST_CASE("partial order residual") {
  const auto cosine = OrderProfile::one_plus_cos();
  const auto balanced = solve_hierarchy(BalancedLimit{1.0, 1.0}, InitialData::chaotic(cosine), 2, 4);
  CHECK(partial_order_residual(balanced.evaluate(2, 50.0), 1.0) <= 1e-10);

  // ordered: the diagonal sits at 1 and the off-diagonal at f(n1 + n2)
  const double m2 = 2.0;
  double diagonal = 0.0;
  for (int n = 1; n <= 3; ++n) diagonal = std::max(diagonal, 1.0 - 2.0 / (m2 * n * n + 2.0));
  CHECK(partial_order_residual(ordered_table(cosine, 2, 3), m2) == doctest::Approx(diagonal + 0.5));
  CHECK(partial_order_residual(ordered_table(OrderProfile::uniform(), 2, 3), m2) == doctest::Approx(diagonal));

  CHECK(partial_order_residual(product_table(OrderProfile::uniform(), 2, 3), 1.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("diagnose") {
  const auto cosine = OrderProfile::one_plus_cos();
  const auto report = diagnose(ordered_table(cosine, 2, 2, 0.5), ordered_table(cosine, 1, 2, 0.5), cosine, 1.0);
  CHECK(report.order_residual < 1e-12);
  CHECK(report.noise_floor == 0.0);
  CHECK_FALSE(report.within_noise);
  CHECK(report.t == 0.5);
  CHECK(report.diag_gap.size() == 2);

  // an empirical ordered ensemble: the residual is pure noise
  std::vector<Configuration> ensemble;
  for (std::size_t r = 0; r < 200; ++r) {
    Engine rng = make_stream(41, r);
    ensemble.push_back({std::vector<double>(20, cosine.sample(rng)), 0.0});
  }
  Engine rng = make_stream(41, 1u << 20);
  const auto t2 = estimate(ensemble, {2, 2}, rng);
  const auto t1 = estimate(ensemble, {1, 2}, rng);
  const auto noisy = diagnose(t2, t1, cosine, 1.0);
  CHECK(noisy.noise_floor > 0.0);
  CHECK(noisy.within_noise);
  CHECK(noisy.order_residual < noisy.noise_floor);
}
