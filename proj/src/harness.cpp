#include "clm/harness.hpp"

#include "clm/io.hpp"
#include "clm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace clm {

BaseDensity make_base_density(DensityFamily family, double param) {
  switch (family) {
    case DensityFamily::gaussian: return BaseDensity::gaussian(param);
    case DensityFamily::laplace: return BaseDensity::laplace(param);
    case DensityFamily::uniform: return BaseDensity::uniform(param);
  }
  throw std::invalid_argument("unknown density family");
}

InitialSpec InitialSpec::parse(const std::string& text) {
  InitialSpec spec;
  std::string name = text;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    name = text.substr(colon + 1);
    if (kind == "ordered") {
      spec.ordered = true;
    } else if (kind != "chaotic" && kind != "iid") {
      throw std::invalid_argument("unknown initial kind '" + kind + "'");
    }
  }
  spec.profile = OrderProfile::preset(name);
  return spec;
}

InitialCondition InitialSpec::condition() const {
  return ordered ? InitialCondition::ordered(profile) : InitialCondition::iid(profile);
}

InitialData InitialSpec::data() const {
  return ordered ? InitialData::ordered(profile) : InitialData::chaotic(profile);
}

std::string InitialSpec::describe() const { return (ordered ? "ordered:" : "chaotic:") + profile.name(); }

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  const auto& grid = j.at("grid");
  c.n_values = grid.at("n").get<std::vector<int>>();
  c.gamma_values = grid.at("gamma").get<std::vector<double>>();
  c.lambda = grid.value("lambda", c.lambda);
  if (grid.contains("kernel")) {
    const auto& kernel = grid.at("kernel");
    c.family = parse_density_family(kernel.value("family", std::string("gaussian")));
    c.kernel_param = kernel.value("param", c.kernel_param);
  }
  c.initial = grid.value("initial", c.initial);
  c.runs = j.value("runs", c.runs);
  c.snapshots = j.value("snapshots", c.snapshots);
  c.n_max = j.value("nmax", c.n_max);
  c.k_max = j.value("kmax", c.k_max);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"name", name},
          {"grid",
           {{"n", n_values},
            {"gamma", gamma_values},
            {"lambda", lambda},
            {"kernel", {{"family", to_string(family)}, {"param", kernel_param}}},
            {"initial", initial}}},
          {"runs", runs},
          {"snapshots", snapshots},
          {"nmax", n_max},
          {"kmax", k_max},
          {"seed", seed},
          {"threads", threads}};
}

void ExperimentConfig::validate() const {
  if (n_values.empty() || gamma_values.empty()) throw std::invalid_argument("experiment grid is empty");
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (k_max < 2) throw std::invalid_argument("kmax must be at least 2 for the summary metrics");
  if (n_max < 1) throw std::invalid_argument("nmax must be at least 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  for (int n : n_values) {
    if (n < 2 || n < k_max) throw std::invalid_argument("every N must be at least max(2, kmax)");
  }
  for (double g : gamma_values) {
    if (!(g >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  }
  for (double s : snapshots) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("snapshot times must be finite and >= 0");
  }
  make_base_density(family, kernel_param);
  InitialSpec::parse(initial);
}

std::vector<double> ExperimentConfig::times() const {
  std::vector<double> out = snapshots;
  out.push_back(0.0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<CoeffTable>> ensemble_marginals(const SimParams& params, const InitialCondition& initial,
                                                        const NoiseKernel& kernel, std::size_t runs, int k_max,
                                                        int n_max, unsigned threads) {
  if (runs == 0) throw std::invalid_argument("ensemble needs at least one run");
  if (k_max < 1 || k_max > params.n_particles) throw std::domain_error("k_max must lie in [1, N]");
  std::vector<double> times = params.snapshot_times;
  if (times.empty()) times.push_back(params.t_end);

  using Partial = std::vector<std::vector<MarginalAccumulator>>;
  auto make = [&] {
    Partial p(times.size());
    for (std::size_t s = 0; s < times.size(); ++s) {
      for (int k = 1; k <= k_max; ++k) p[s].emplace_back(EstimateOptions{k, n_max, 64, TupleStrategy::automatic}, times[s]);
    }
    return p;
  };
  // separate stream family for the tuple sampler, used only in sampled mode
  const std::uint64_t estimator_seed = params.seed ^ 0x6d617267696e616cULL;
  auto visit = [&](Partial& p, std::size_t r, const std::vector<Snapshot>& snaps) {
    Engine rng = make_stream(estimator_seed, r);
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      for (auto& acc : p[s]) acc.add_run(snaps[s].config.angles, rng);
    }
  };
  auto combine = [](Partial& into, Partial&& from) {
    for (std::size_t s = 0; s < into.size(); ++s) {
      for (std::size_t k = 0; k < into[s].size(); ++k) into[s][k].absorb(from[s][k]);
    }
  };
  const Partial total = run_ensemble<Partial>(params, initial, kernel, runs, make, visit, combine, threads);

  std::vector<std::vector<CoeffTable>> out(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    for (const auto& acc : total[s]) out[s].push_back(acc.table());
  }
  return out;
}

Comparison compare_mc_analytic(const CoeffTable& empirical, const CoeffTable& analytic) {
  if (empirical.k() != analytic.k() || empirical.n_max() != analytic.n_max() ||
      std::abs(empirical.t() - analytic.t()) > 1e-12) {
    throw std::domain_error("compared tables must share k, n_max and t");
  }
  Comparison out;
  out.z.assign(empirical.size(), std::nan(""));
  std::vector<double> finite;
  std::size_t within = 0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    if (!empirical.available_at(i) || !analytic.available_at(i)) continue;
    const double gap = std::abs(empirical.value_at(i) - analytic.value_at(i));
    const double se = empirical.standard_error_at(i).value_or(0.0);
    double z = 0.0;
    if (se > 0.0) {
      z = gap / se;
    } else if (gap > 1e-12) {
      z = std::numeric_limits<double>::infinity();
      out.flagged.push_back(i);
    }
    out.z[i] = z;
    finite.push_back(z);
    if (z <= 4.0) ++within;
  }
  out.compared = finite.size();
  if (!finite.empty()) {
    out.fraction_within_4 = static_cast<double>(within) / static_cast<double>(finite.size());
    std::sort(finite.begin(), finite.end());
    const std::size_t mid = finite.size() / 2;
    out.median_z = finite.size() % 2 ? finite[mid] : 0.5 * (finite[mid - 1] + finite[mid]);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (cell + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void write_manifest(const std::filesystem::path& out_dir, const ExperimentConfig& config,
                    const std::vector<std::filesystem::path>& files, bool complete, const std::string& error) {
  nlohmann::json manifest;
  manifest["name"] = config.name;
  manifest["config"] = config.to_json();
  manifest["complete"] = complete;
  if (!error.empty()) manifest["error"] = error;
  manifest["files"] = nlohmann::json::array();
  for (const auto& f : files) {
    nlohmann::json entry;
    entry["path"] = std::filesystem::relative(f, out_dir).generic_string();
    entry["bytes"] = std::filesystem::file_size(f);
    entry["sha256"] = sha256_file(f);
    manifest["files"].push_back(entry);
  }
  std::ofstream out(out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest.json");
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  ExperimentReport report;
  std::filesystem::create_directories(out_dir);
  const auto times = config.times();
  const InitialSpec spec = InitialSpec::parse(config.initial);
  const BaseDensity base = make_base_density(config.family, config.kernel_param);

  try {
    std::size_t cell = 0;
    std::vector<PlotSeries> residual_series;
    for (int n : config.n_values) {
      for (double gamma : config.gamma_values) {
        const NoiseKernel kernel(base, std::pow(static_cast<double>(n), -gamma));
        SimParams params;
        params.n_particles = n;
        params.lambda = config.lambda;
        params.noise = NoiseScale::from_gamma(gamma);
        params.mode = TimeScale::rescaled;
        params.seed = cell_seed(config.seed, cell++);
        params.t_end = times.back();
        params.snapshot_times = times;

        const auto empirical =
            ensemble_marginals(params, spec.condition(), kernel, config.runs, config.k_max, config.n_max, config.threads);
        const auto solution =
            solve_hierarchy(FiniteN{n, kernel, config.lambda}, spec.data(), config.k_max, config.n_max);

        const auto cell_dir = out_dir / ("cell_N" + std::to_string(n) + "_gamma" + format_double(gamma));
        std::filesystem::create_directories(cell_dir);
        std::ofstream comparison(cell_dir / "comparison.csv");
        comparison << "k,t,compared,fraction_within_4se,median_z,flagged\n";

        PlotSeries series{"N=" + std::to_string(n) + " gamma=" + format_double(gamma), {}, {}};
        for (std::size_t s = 0; s < times.size(); ++s) {
          const std::string tag = "_t" + format_double(times[s]) + ".csv";
          for (int k = 1; k <= config.k_max; ++k) {
            const auto& emp = empirical[s][static_cast<std::size_t>(k - 1)];
            const auto analytic = solution.evaluate(k, times[s]);
            const auto emp_path = cell_dir / ("empirical_k" + std::to_string(k) + tag);
            const auto ana_path = cell_dir / ("analytic_k" + std::to_string(k) + tag);
            write_table_csv(emp_path, emp);
            report.files.push_back(emp_path);
            write_table_csv(ana_path, analytic);
            report.files.push_back(ana_path);
            const auto cmp = compare_mc_analytic(emp, analytic);
            comparison << k << ',' << format_double(times[s]) << ',' << cmp.compared << ','
                       << format_double(cmp.fraction_within_4) << ',' << format_double(cmp.median_z) << ','
                       << cmp.flagged.size() << '\n';
          }
          const auto diag = diagnose(empirical[s][1], empirical[s][0], spec.profile, base.moment(2));
          report.summary.push_back({n, gamma, times[s], diag.order_residual, diag.chaos_residual, diag.diag_gap.at(0),
                                    diag.within_noise});
          series.x.push_back(times[s]);
          series.y.push_back(diag.order_residual);
        }
        comparison.close();
        if (!comparison) throw std::runtime_error("cannot write " + (cell_dir / "comparison.csv").string());
        report.files.push_back(cell_dir / "comparison.csv");
        residual_series.push_back(std::move(series));
      }
    }

    const auto summary_path = out_dir / "summary.csv";
    std::ofstream summary(summary_path, std::ios::binary);
    summary << "n_particles,gamma,t,order_residual,chaos_residual,diag_gap_n1,se_flag\n";
    for (const auto& row : report.summary) {
      summary << row.n_particles << ',' << format_double(row.gamma) << ',' << format_double(row.t) << ','
              << format_double(row.order_residual) << ',' << format_double(row.chaos_residual) << ','
              << format_double(row.diag_gap_n1) << ',' << (row.se_flag ? 1 : 0) << '\n';
    }
    summary.close();
    if (!summary) throw std::runtime_error("cannot write " + summary_path.string());
    report.files.push_back(summary_path);

    const auto plot_path = out_dir / "order_residual.svg";
    write_svg_line_plot(plot_path, residual_series, config.name + ": order residual", "t", "order residual");
    report.files.push_back(plot_path);

    report.complete = true;
    write_manifest(out_dir, config, report.files, true, "");
  } catch (const std::exception& e) {
    std::vector<std::filesystem::path> finished;
    for (const auto& f : report.files) {
      if (std::filesystem::exists(f)) finished.push_back(f);
    }
    try {
      write_manifest(out_dir, config, finished, false, e.what());
    } catch (...) {
    }
    throw;
  }
  return report;
}

}  // namespace clm
