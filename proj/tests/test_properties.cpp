#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clm/harness.hpp"
#include "clm/io.hpp"
#include "property_checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace clm;

// Randomized structural checks on every kind of table the pipeline emits.

namespace {

int cases = 0;

}  // namespace

using namespace props;

TEST_CASE("analytic tables from random regimes and initial data") {
  Engine rng = make_stream(2024, 0);
  std::uniform_int_distribution<int> regime_kind(0, 3), n_dist(4, 64), k_dist(1, 3), nmax_dist(1, 3);
  std::uniform_real_distribution<double> gamma(0.25, 1.0), lambda(0.3, 2.0), time(0.0, 3.0), m2(0.5, 2.0);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = n_dist(rng);
    const double lam = lambda(rng);
    const NoiseKernel kernel = random_kernel(rng, std::pow(n, -gamma(rng)));
    Regime regime = StrongLimit{lam};
    switch (regime_kind(rng)) {
      case 0: regime = FiniteN{n, kernel, lam}; break;
      case 2: regime = BalancedLimit{lam, m2(rng)}; break;
      case 3: regime = Unscaled{kernel, lam}; break;
      default: break;
    }
    const auto profile = random_profile(rng);
    const bool ordered = trial % 2 == 0;
    const auto initial = ordered ? InitialData::ordered(profile) : InitialData::chaotic(profile);
    const int k_max = k_dist(rng);
    const int n_max = nmax_dist(rng);
    const double t = time(rng);
    const auto solution = solve_hierarchy(regime, initial, k_max, n_max);

    std::vector<CoeffTable> levels;
    for (int k = 1; k <= k_max; ++k) levels.push_back(solution.evaluate(k, t));
    INFO("trial ", trial, " ", describe(regime), " ", initial.describe(), " k_max ", k_max, " t ", t);
    for (int k = 1; k <= k_max; ++k) {
      const auto& table = levels[static_cast<std::size_t>(k - 1)];
      CHECK(violations(table, 1e-12).empty());
      CHECK(check_invariants(table, 1e-12).empty());
      if (k > 1) CHECK(consistency_gap(table, levels[static_cast<std::size_t>(k - 2)]) < 1e-12);
    }
    // solving again from scratch is bit-identical
    const auto again = solve_hierarchy(regime, initial, k_max, n_max);
    CHECK(identical(again.evaluate(k_max, t), levels.back()));
    ++cases;
  }
}

TEST_CASE("empirical tables from random ensembles") {
  Engine rng = make_stream(2024, 1);
  std::uniform_int_distribution<int> n_dist(3, 12), runs_dist(100, 400), k_dist(1, 3), nmax_dist(1, 2), init_kind(0, 2);
  std::uniform_real_distribution<double> gamma(0.25, 1.0), time(0.05, 1.0), unit(0.0, 1.0);
  for (int trial = 0; trial < 80; ++trial) {
    SimParams p;
    p.n_particles = n_dist(rng);
    p.noise = NoiseScale::from_gamma(gamma(rng));
    p.lambda = 0.5 + unit(rng);
    p.mode = trial % 3 == 0 ? TimeScale::unscaled : TimeScale::rescaled;
    p.seed = rng();
    const double t1 = time(rng);
    p.snapshot_times = {0.0, t1, t1 + time(rng)};
    p.t_end = p.snapshot_times.back();
    const NoiseKernel kernel = random_kernel(rng, p.epsilon());
    const auto profile = random_profile(rng);
    const int kind = init_kind(rng);
    const auto initial = kind == 0   ? InitialCondition::iid(profile)
                         : kind == 1 ? InitialCondition::ordered(profile)
                                     : InitialCondition::point_mass(kTwoPi * unit(rng));
    const auto runs = static_cast<std::size_t>(runs_dist(rng));
    const int k_max = std::min(k_dist(rng), p.n_particles);
    const int n_max = nmax_dist(rng);

    const auto one = ensemble_marginals(p, initial, kernel, runs, k_max, n_max, 1);
    const auto three = ensemble_marginals(p, initial, kernel, runs, k_max, n_max, 3);
    INFO("trial ", trial, " N ", p.n_particles, " k_max ", k_max, " runs ", runs);
    REQUIRE(one.size() == p.snapshot_times.size());
    for (std::size_t s = 0; s < one.size(); ++s) {
      for (int k = 1; k <= k_max; ++k) {
        const auto& table = one[s][static_cast<std::size_t>(k - 1)];
        CHECK(table.runs() == runs);
        CHECK(identical(table, three[s][static_cast<std::size_t>(k - 1)]));
        // the exhaustive estimator is symmetric run by run
        CHECK(violations(table, 1e-12).empty());
        CHECK(check_invariants(table, 1e-12).empty());
        if (k > 1) CHECK(consistency_gap(table, one[s][static_cast<std::size_t>(k - 2)]) < 1e-12);
      }
    }
    ++cases;
  }
}

TEST_CASE("sampled tuples: exact mass and seed determinism") {
  Engine rng = make_stream(2024, 2);
  std::uniform_int_distribution<int> n_dist(6, 20), k_dist(2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    SimParams p;
    p.n_particles = n_dist(rng);
    p.noise = NoiseScale::from_gamma(0.5);
    p.seed = rng();
    p.t_end = 0.3;
    p.snapshot_times = {0.3};
    const NoiseKernel kernel(BaseDensity::gaussian(1.0), p.epsilon());
    const auto initial = InitialCondition::iid(random_profile(rng));
    std::vector<Configuration> ensemble;
    for (std::size_t r = 0; r < 30; ++r) {
      Engine run_rng = make_stream(p.seed, r);
      ensemble.push_back(run(p, initial, kernel, run_rng).back().config);
    }
    const EstimateOptions options{k_dist(rng), 2, 16, TupleStrategy::sampled};
    const std::uint64_t stream = rng();
    Engine a = make_stream(stream, 0), b = make_stream(stream, 0);
    const auto first = estimate(ensemble, options, a);
    const auto second = estimate(ensemble, options, b);
    CHECK(identical(first, second));
    const Tuple zero(static_cast<std::size_t>(options.k), 0);
    CHECK(first.value(zero) == std::complex<double>(1.0, 0.0));
    // each sampled tuple contributes e^{-i n.theta} and its conjugate at -n
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(std::abs(first.value_at(first.lattice().negated(i)) - std::conj(first.value_at(i))) < 1e-12);
    }
    // permutation symmetry only holds in law: within 5 SE
    CHECK(check_invariants(first, 1e-12, 5.0).empty());
    ++cases;
  }
}

TEST_CASE("csv round trips keep every table intact") {
  Engine rng = make_stream(2024, 3);
  std::uniform_int_distribution<int> k_dist(1, 3), nmax_dist(1, 3);
  std::uniform_real_distribution<double> time(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto profile = random_profile(rng);
    const int k = k_dist(rng);
    const double t = time(rng);
    const auto solution = solve_hierarchy(StrongLimit{1.0}, InitialData::chaotic(profile), k, nmax_dist(rng));
    const auto table = solution.evaluate(k, t);
    std::stringstream s;
    write_table_csv(s, table);
    const auto back = read_table_csv(s);
    CHECK(back.t() == t);
    CHECK(identical(back, table));
    CHECK(violations(back, 1e-12).empty());
    ++cases;
  }
}

TEST_CASE("corrupted tables are caught") {
  Engine rng = make_stream(2024, 4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto profile = random_profile(rng);
    const auto solution = solve_hierarchy(BalancedLimit{1.0, 1.0}, InitialData::chaotic(profile), 2, 2);
    auto table = solution.evaluate(2, 0.5);
    std::uniform_int_distribution<std::size_t> pick(0, table.size() - 1);
    const std::size_t i = pick(rng);
    table.set_value_at(i, table.value_at(i) + std::complex<double>(0.0, 1e-6));
    CHECK_FALSE(violations(table, 1e-12).empty());
    CHECK_FALSE(check_invariants(table, 1e-12).empty());
    ++cases;
  }
}

TEST_CASE("case count") {
  // doctest runs cases in file order
  CHECK(cases >= 200);
}
