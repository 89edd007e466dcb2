// clm: command line front end.
//
//   clm kernel      coefficient bound table for one noise kernel
//   clm simulate    ensembles of the particle system, one CSV per snapshot
//   clm marginals   empirical Fourier marginals from a snapshot CSV
//   clm hierarchy   exact hierarchy solution on a lattice
//   clm hprofile    balanced-regime pair profile H as CSV and SVG
//   clm metrics     order / chaos residuals of coefficient CSVs
//   clm experiment  grid sweep driven by a JSON config

#include "clm/harness.hpp"
#include "clm/hierarchy.hpp"
#include "clm/io.hpp"
#include "clm/kernel.hpp"
#include "clm/marginals.hpp"
#include "clm/metrics.hpp"
#include "clm/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace clm;
namespace fs = std::filesystem;

namespace {

struct KernelOptions {
  std::string family = "gaussian";
  std::optional<double> sigma, b, a;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--density", family, "gaussian, laplace or uniform")->capture_default_str();
    cmd.add_option("--sigma", sigma, "Gaussian standard deviation (default 1)");
    cmd.add_option("--b", b, "Laplace decay length (default 1)");
    cmd.add_option("--a", a, "uniform half-width (default 1)");
  }

  BaseDensity base() const {
    const auto f = parse_density_family(family);
    const auto& given = f == DensityFamily::gaussian ? sigma : f == DensityFamily::laplace ? b : a;
    return make_base_density(f, given.value_or(1.0));
  }
};

// eps from --epsilon, else N^{-gamma}.
double resolve_epsilon(std::optional<double> epsilon, std::optional<double> gamma, std::optional<int> n) {
  if (epsilon) return *epsilon;
  if (gamma && n) return std::pow(static_cast<double>(*n), -*gamma);
  throw std::invalid_argument("give --epsilon, or --gamma together with --n");
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------------------

void run_kernel(const KernelOptions& k, double epsilon, int n_max, int moment_k) {
  const NoiseKernel kernel(k.base(), epsilon);
  std::ostringstream rows;
  for (int n = -n_max; n <= n_max; ++n) {
    const auto c = kernel.coeff_bound_check(n, moment_k);
    rows << n << ',' << format_double(c.g_hat) << ',' << format_double(c.lhs) << ',' << format_double(c.rhs)
         << ',' << (c.pass ? 1 : 0) << '\n';
  }
  std::cout << "n,g_hat,bound_lhs,bound_rhs,pass\n" << rows.str();
}

struct SimulateOptions {
  int n = 32;
  double lambda = 1.0;
  std::optional<double> gamma, epsilon;
  std::string mode = "rescaled";
  double t_end = 1.0;
  std::vector<double> snapshots;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string initial = "chaotic:one-plus-cos";
  unsigned threads = 0;
  std::string out = "sim";
};

void run_simulate(const SimulateOptions& o, const KernelOptions& k) {
  SimParams p;
  p.n_particles = o.n;
  p.lambda = o.lambda;
  p.noise = o.epsilon ? NoiseScale::from_epsilon(*o.epsilon) : NoiseScale::from_gamma(o.gamma.value_or(1.0));
  p.mode = parse_time_scale(o.mode);
  p.t_end = o.t_end;
  p.snapshot_times = o.snapshots.empty() ? std::vector<double>{o.t_end} : o.snapshots;
  p.seed = o.seed;
  p.validate();
  const auto spec = InitialSpec::parse(o.initial);
  const NoiseKernel kernel(k.base(), p.epsilon());

  using PerSnapshot = std::vector<std::vector<Configuration>>;
  const std::size_t count = p.snapshot_times.size();
  const auto all = run_ensemble<PerSnapshot>(
      p, spec.condition(), kernel, o.runs, [&] { return PerSnapshot(count); },
      [](PerSnapshot& acc, std::size_t, std::vector<Snapshot> snaps) {
        for (std::size_t s = 0; s < snaps.size(); ++s) acc[s].push_back(std::move(snaps[s].config));
      },
      [](PerSnapshot& into, PerSnapshot from) {
        for (std::size_t s = 0; s < into.size(); ++s) {
          for (auto& c : from[s]) into[s].push_back(std::move(c));
        }
      },
      o.threads);

  const fs::path dir = o.out;
  fs::create_directories(dir);
  nlohmann::json meta;
  meta["n"] = o.n;
  meta["lambda"] = o.lambda;
  if (o.gamma && !o.epsilon) meta["gamma"] = *o.gamma;
  meta["epsilon"] = p.epsilon();
  meta["mode"] = to_string(p.mode);
  meta["t_end"] = o.t_end;
  meta["runs"] = o.runs;
  meta["seed"] = o.seed;
  meta["initial"] = spec.describe();
  meta["kernel"] = {{"family", to_string(kernel.base().family())}, {"param", kernel.base().scale()}};
  meta["snapshots"] = nlohmann::json::array();
  for (std::size_t s = 0; s < count; ++s) {
    const std::string name = "snapshot_t" + format_double(p.snapshot_times[s]) + ".csv";
    auto out = open_out(dir / name);
    write_snapshot_csv(out, all[s]);
    meta["snapshots"].push_back({{"t", p.snapshot_times[s]}, {"file", name}});
  }
  open_out(dir / "meta.json") << meta.dump(2) << '\n';
}

// Snapshot time: --t if given, else looked up in meta.json beside the file.
double snapshot_time(const fs::path& input, std::optional<double> t) {
  if (t) return *t;
  const auto meta_path = input.parent_path() / "meta.json";
  std::ifstream in(meta_path);
  if (in) {
    const auto meta = nlohmann::json::parse(in);
    for (const auto& s : meta.at("snapshots")) {
      if (s.at("file").get<std::string>() == input.filename().string()) return s.at("t").get<double>();
    }
  }
  throw std::invalid_argument("no time for " + input.string() + ": pass --t or keep meta.json beside it");
}

// ---------------------------------------------------------------------------

struct HierarchyOptions {
  std::string regime = "finite-n";
  std::optional<int> n;
  int k_max = 2;
  int n_max = 2;
  double lambda = 1.0;
  std::optional<double> gamma, epsilon, m2;
  std::string initial = "chaotic:one-plus-cos";
  std::vector<double> times{1.0};
};

Regime make_regime(const HierarchyOptions& o, const KernelOptions& k) {
  if (o.regime == "finite-n") {
    if (!o.n) throw std::invalid_argument("finite-n needs --n");
    return FiniteN{*o.n, NoiseKernel(k.base(), resolve_epsilon(o.epsilon, o.gamma, o.n)), o.lambda};
  }
  if (o.regime == "strong-limit") return StrongLimit{o.lambda};
  if (o.regime == "balanced-limit") return BalancedLimit{o.lambda, o.m2.value_or(k.base().moment(2))};
  if (o.regime == "unscaled") return Unscaled{NoiseKernel(k.base(), resolve_epsilon(o.epsilon, o.gamma, o.n)), o.lambda};
  throw std::invalid_argument("unknown regime '" + o.regime + "'");
}

void run_hierarchy(const HierarchyOptions& o, const KernelOptions& k) {
  const auto solution = solve_hierarchy(make_regime(o, k), InitialSpec::parse(o.initial).data(), o.k_max, o.n_max);
  // one row per tuple; n_j columns beyond the tuple's level stay empty
  std::cout << 'k';
  for (int j = 1; j <= o.k_max; ++j) std::cout << ",n" << j;
  std::cout << ",t,re,im\n";
  for (double t : o.times) {
    for (int level = 1; level <= o.k_max; ++level) {
      const auto table = solution.evaluate(level, t);
      for_each_tuple(table.lattice(), [&](std::size_t idx, const Tuple& tuple) {
        std::cout << level;
        for (int j = 0; j < o.k_max; ++j) {
          std::cout << ',';
          if (j < level) std::cout << tuple[static_cast<std::size_t>(j)];
        }
        const auto v = table.value_at(idx);
        std::cout << ',' << format_double(t) << ',' << format_double(v.real()) << ',' << format_double(v.imag())
                  << '\n';
      });
    }
  }
}

void run_hprofile(double m2, int terms, int grid, const std::string& csv, const std::string& svg) {
  const auto h = H_profile(m2, terms, grid);
  std::ofstream file;
  if (!csv.empty()) file = open_out(csv);
  std::ostream& out = csv.empty() ? std::cout : file;
  out << "theta,H\n";
  for (std::size_t j = 0; j < h.theta.size(); ++j) out << format_double(h.theta[j]) << ',' << format_double(h.value[j]) << '\n';
  if (!svg.empty()) {
    write_svg_line_plot(svg, {{"H, m2 = " + format_double(m2), h.theta, h.value}},
                        "balanced pair profile, " + std::to_string(terms) + " terms", "theta", "H(theta)");
  }
}

// ---------------------------------------------------------------------------

void run_metrics(const std::vector<std::string>& level2, const std::vector<std::string>& level1,
                 const std::string& profile_name, std::optional<double> m2, const KernelOptions& k,
                 const std::string& diag_out) {
  const auto profile = InitialSpec::parse(profile_name).profile;
  const double moment2 = m2.value_or(k.base().moment(2));
  std::map<double, CoeffTable> firsts;
  for (const auto& path : level1) {
    auto t = read_table_csv(fs::path(path));
    if (t.k() != 1) throw std::invalid_argument(path + " is not a level-1 table");
    firsts.emplace(t.t(), std::move(t));
  }
  std::ofstream diag_file;
  if (!diag_out.empty()) diag_file = open_out(diag_out);
  std::ostringstream diag;
  diag << "t,n,diag_gap\n";
  std::cout << "t,order_residual,chaos_residual,partial_order_residual\n";
  for (const auto& path : level2) {
    const auto table2 = read_table_csv(fs::path(path));
    if (table2.k() != 2) throw std::invalid_argument(path + " is not a level-2 table");
    // without a level-1 file the trailing-zero slice of level 2 is level 1
    const auto found = firsts.find(table2.t());
    const CoeffTable table1 = found != firsts.end() ? found->second
                                                    : CoeffTable::analytic(1, table2.n_max(), table2.t(),
                                                                           [&](std::span<const int> n) {
                                                                             const int pair[] = {n[0], 0};
                                                                             return table2.value(pair);
                                                                           });
    const auto report = diagnose(table2, table1, profile, moment2);
    std::cout << format_double(report.t) << ',' << format_double(report.order_residual) << ','
              << format_double(report.chaos_residual) << ',' << format_double(report.partial_order_residual) << '\n';
    for (std::size_t n = 0; n < report.diag_gap.size(); ++n) {
      diag << format_double(report.t) << ',' << n + 1 << ',' << format_double(report.diag_gap[n]) << '\n';
    }
  }
  if (diag_out.empty()) {
    std::cout << '\n' << diag.str();
  } else {
    diag_file << diag.str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Choose-the-Leader model: simulation, exact hierarchy and diagnostics"};
  app.require_subcommand(1);

  // kernel
  auto* kernel_cmd = app.add_subcommand("kernel", "Fourier coefficients of g_eps and the small-frequency bound");
  KernelOptions kernel_opts;
  double kernel_eps = 0.1;
  int kernel_nmax = 50, kernel_moment = 3;
  kernel_opts.add_to(*kernel_cmd);
  kernel_cmd->add_option("--epsilon", kernel_eps, "noise scale")->capture_default_str();
  kernel_cmd->add_option("--nmax", kernel_nmax, "report n in [-nmax, nmax]")->capture_default_str();
  kernel_cmd->add_option("--moment-k", kernel_moment, "moment order in the bound (3 or 4)")->capture_default_str();
  kernel_cmd->callback([&] { run_kernel(kernel_opts, kernel_eps, kernel_nmax, kernel_moment); });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run ensembles and write one CSV per snapshot");
  SimulateOptions sim;
  KernelOptions sim_kernel;
  sim_kernel.add_to(*sim_cmd);
  sim_cmd->add_option("--n", sim.n, "particles")->capture_default_str();
  sim_cmd->add_option("--lambda", sim.lambda)->capture_default_str();
  auto* sim_gamma = sim_cmd->add_option("--gamma", sim.gamma, "eps = N^-gamma (default 1)");
  sim_cmd->add_option("--epsilon", sim.epsilon, "noise scale")->excludes(sim_gamma);
  sim_cmd->add_option("--mode", sim.mode, "rescaled or unscaled")->capture_default_str();
  sim_cmd->add_option("--t-end", sim.t_end)->capture_default_str();
  sim_cmd->add_option("--snapshots", sim.snapshots, "snapshot times (default: t-end)")->delimiter(',');
  sim_cmd->add_option("--runs", sim.runs)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--initial", sim.initial, "chaotic:<profile>, ordered:<profile> or a profile")
      ->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "0 = all cores")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "output directory")->capture_default_str();
  sim_cmd->callback([&] { run_simulate(sim, sim_kernel); });

  // marginals
  auto* marg_cmd = app.add_subcommand("marginals", "empirical Fourier marginal from a snapshot CSV");
  std::string marg_input, marg_strategy = "automatic";
  std::optional<double> marg_t;
  EstimateOptions marg;
  std::uint64_t marg_seed = 0;
  marg_cmd->add_option("input", marg_input, "snapshot CSV written by simulate")->required();
  marg_cmd->add_option("--k", marg.k)->capture_default_str();
  marg_cmd->add_option("--nmax", marg.n_max)->capture_default_str();
  marg_cmd->add_option("--tuples-per-config", marg.tuples_per_config, "sampled mode only")->capture_default_str();
  marg_cmd->add_option("--strategy", marg_strategy, "automatic, exhaustive or sampled")->capture_default_str();
  marg_cmd->add_option("--t", marg_t, "snapshot time (default: from meta.json)");
  marg_cmd->add_option("--seed", marg_seed, "tuple sampling seed")->capture_default_str();
  marg_cmd->callback([&] {
    marg.strategy = parse_tuple_strategy(marg_strategy);
    const double t = snapshot_time(marg_input, marg_t);
    const auto runs = read_snapshot_csv(fs::path(marg_input), t);
    Engine rng = make_stream(marg_seed, 0);
    write_table_csv(std::cout, estimate(runs, marg, rng));
  });

  // hierarchy
  auto* hier_cmd = app.add_subcommand("hierarchy", "exact hierarchy solution");
  HierarchyOptions hier;
  KernelOptions hier_kernel;
  hier_kernel.add_to(*hier_cmd);
  hier_cmd->add_option("--regime", hier.regime, "finite-n, strong-limit, balanced-limit or unscaled")
      ->capture_default_str();
  hier_cmd->add_option("--n", hier.n, "particles");
  hier_cmd->add_option("--kmax", hier.k_max)->capture_default_str();
  hier_cmd->add_option("--nmax", hier.n_max)->capture_default_str();
  hier_cmd->add_option("--lambda", hier.lambda)->capture_default_str();
  auto* hier_gamma = hier_cmd->add_option("--gamma", hier.gamma, "eps = N^-gamma");
  hier_cmd->add_option("--epsilon", hier.epsilon)->excludes(hier_gamma);
  hier_cmd->add_option("--m2", hier.m2, "balanced limit second moment (default: from --density)");
  hier_cmd->add_option("--initial", hier.initial)->capture_default_str();
  hier_cmd->add_option("--times", hier.times)->delimiter(',')->capture_default_str();
  hier_cmd->callback([&] { run_hierarchy(hier, hier_kernel); });

  // hprofile
  auto* h_cmd = app.add_subcommand("hprofile", "balanced-regime pair profile H(theta)");
  double h_m2 = 1.0;
  int h_terms = 500, h_grid = 1024;
  std::string h_csv, h_svg = "h_profile.svg";
  h_cmd->add_option("--m2", h_m2)->capture_default_str();
  h_cmd->add_option("--terms", h_terms)->capture_default_str();
  h_cmd->add_option("--grid", h_grid)->capture_default_str();
  h_cmd->add_option("--csv", h_csv, "CSV path (default: stdout)");
  h_cmd->add_option("--svg", h_svg, "SVG path, empty to skip")->capture_default_str();
  h_cmd->callback([&] { run_hprofile(h_m2, h_terms, h_grid, h_csv, h_svg); });

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "order and chaos residuals of coefficient CSVs");
  std::vector<std::string> met_k2, met_k1;
  std::string met_profile = "one-plus-cos", met_diag;
  std::optional<double> met_m2;
  KernelOptions met_kernel;
  met_kernel.add_to(*met_cmd);
  met_cmd->add_option("--k2", met_k2, "level-2 table CSVs, one per time")->required();
  met_cmd->add_option("--k1", met_k1, "level-1 table CSVs matched by time (optional)");
  met_cmd->add_option("--profile", met_profile, "reference one-particle profile")->capture_default_str();
  met_cmd->add_option("--m2", met_m2, "second moment (default: from --density)");
  met_cmd->add_option("--diag-gap", met_diag, "write t,n,diag_gap here instead of after the main table");
  met_cmd->callback([&] { run_metrics(met_k2, met_k1, met_profile, met_m2, met_kernel, met_diag); });

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "grid sweep from a JSON config");
  std::string exp_config, exp_out;
  exp_cmd->add_option("--config", exp_config)->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--out", exp_out)->required();
  exp_cmd->callback([&] {
    const auto report = run_experiment(ExperimentConfig::load(exp_config), exp_out);
    std::cerr << report.files.size() << " files written to " << exp_out << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "clm: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
