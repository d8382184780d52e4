// Command-line laboratory for the damped kicked top: complex Liouvillian
// spectra and their ratio statistics on the quantum side, attractor metrics
// on the classical side, plus the parameter-sweep driver.

#include <filesystem>
#include <fstream>
#include <map>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ktop/classical.hpp"
#include "ktop/constants.hpp"
#include "ktop/csv.hpp"
#include "ktop/liouville.hpp"
#include "ktop/parallel.hpp"
#include "ktop/spectral_stats.hpp"
#include "ktop/sweep.hpp"

namespace {

using namespace ktop;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct PointArgs {
  double p = 2.0;
  double k0 = 10.0;
  double k1 = 8.0;
  double gamma = 0.1;
};

void add_point_options(CLI::App* cmd, PointArgs* args) {
  cmd->add_option("--p", args->p, "precession strength");
  cmd->add_option("--k0", args->k0, "torsion strength");
  cmd->add_option("--k1", args->k1, "kick strength");
  cmd->add_option("--gamma", args->gamma, "dissipation strength");
}

void warn_gamma(double gamma) {
  if (gamma > constants::kGammaPrecisionThreshold) {
    std::cerr << "warning: gamma=" << gamma
              << " is beyond the validated precision regime (0 < gamma <= "
              << constants::kGammaPrecisionThreshold << ")\n";
  }
}

void check_desk_scale(double j, bool allow_large) {
  if (j > constants::kMaxDeskScaleSpin && !allow_large) {
    throw std::invalid_argument(
        "j=" + std::to_string(j) + " exceeds the desk-scale ceiling (" +
        std::to_string(constants::kMaxDeskScaleSpin) + "); pass --allow-large to override");
  }
}

int run_quantum_spectrum(const PointArgs& pt, double j, const std::string& sector_name,
                         double epsilon, bool allow_large, const std::string& out) {
  check_desk_scale(j, allow_large);
  warn_gamma(pt.gamma);
  const auto sector = liouville::sector_from_name(sector_name);
  liouville::ModelParams mp{pt.p, pt.k0, pt.k1, pt.gamma, spin::SpinJ(j)};
  const CMatrix d = liouville::dissipative_floquet(mp);
  const auto spec = liouville::spectrum(d, sector);
  const auto [kept, fraction] = liouville::precision_filter(spec, epsilon);
  liouville::write_spectrum_csv(
      out, kept,
      {{"p", csv::format(pt.p)},
       {"k0", csv::format(pt.k0)},
       {"k1", csv::format(pt.k1)},
       {"gamma", csv::format(pt.gamma)},
       {"j", csv::format(j)},
       {"epsilon", csv::format(epsilon)},
       {"filtered_fraction", csv::format(fraction)},
       {"n_near_branch_cut", csv::format(kept.n_near_branch_cut)},
       {"constants_version", constants::kConstantsVersion},
       {"code_version", constants::kCodeVersion}});
  std::cout << "wrote " << kept.eigenvalues.size() << " eigenvalues (" << sector_name
            << " sector, filtered fraction " << fraction << ") to " << out << "\n";
  return kExitOk;
}

// Reads eigenphases (and the '#' key=value metadata) back from a spectrum
// CSV produced by quantum-spectrum.
std::vector<Complex> read_spectrum_phases(const std::string& path,
                                          std::map<std::string, std::string>* metadata) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open spectrum file: " + path);
  }
  std::vector<Complex> phases;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (metadata != nullptr && eq != std::string::npos) {
        (*metadata)[line.substr(2, eq - 2)] = line.substr(eq + 1);
      }
      continue;
    }
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 4) {
      throw std::invalid_argument("malformed spectrum row: " + line);
    }
    phases.emplace_back(std::stod(fields[2]), std::stod(fields[3]));
  }
  return phases;
}

int run_ratio_stats(const std::string& spectrum_file, const PointArgs& pt, double j,
                    const std::string& sector_name, double epsilon, bool allow_large,
                    const std::string& out) {
  std::vector<Complex> phases;
  sweep::SweepRecord rec;
  rec.p = pt.p;
  rec.k0 = pt.k0;
  rec.k1 = pt.k1;
  rec.gamma = pt.gamma;
  rec.j = j;
  rec.sector = sector_name;
  spectral::RatioStatistics stats;
  if (!spectrum_file.empty()) {
    std::map<std::string, std::string> meta;
    phases = read_spectrum_phases(spectrum_file, &meta);
    stats = spectral::ratio_statistics(spectral::complex_spacing_ratios(phases));
    rec.n_eigs = static_cast<int>(phases.size());
    const auto pick = [&meta](const char* key, double fallback) {
      const auto it = meta.find(key);
      return it == meta.end() ? fallback : std::stod(it->second);
    };
    rec.p = pick("p", rec.p);
    rec.k0 = pick("k0", rec.k0);
    rec.k1 = pick("k1", rec.k1);
    rec.gamma = pick("gamma", rec.gamma);
    rec.j = pick("j", rec.j);
    rec.filtered_fraction = pick("filtered_fraction", 0.0);
  } else {
    check_desk_scale(j, allow_large);
    warn_gamma(pt.gamma);
    liouville::ModelParams mp{pt.p, pt.k0, pt.k1, pt.gamma, spin::SpinJ(j)};
    const auto point =
        sweep::quantum_point_stats(mp, sweep::sector_choice_from_name(sector_name), epsilon);
    stats = point.stats;
    rec.n_eigs = point.n_eigs;
    rec.filtered_fraction = point.filtered_fraction;
  }
  rec.quantum_ok = true;
  rec.mean_r = stats.mean_r;
  rec.neg_mean_cos = stats.neg_mean_cos;
  rec.r_c = stats.r_c;
  rec.theta_c = stats.theta_c;
  rec.normalized_valid = stats.normalized_valid;

  std::cout << "n_eigs=" << rec.n_eigs << " mean_r=" << stats.mean_r
            << " neg_mean_cos=" << stats.neg_mean_cos;
  if (stats.normalized_valid) {
    std::cout << " R_c=" << stats.r_c << " Theta_c=" << stats.theta_c;
  }
  std::cout << "\n";
  if (!out.empty()) {
    sweep::write_stats_csv(out, {rec});
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int run_classical_metrics(const PointArgs& pt, int n_ic, int n_periods, int transient,
                          double h_tol, const std::string& map_name, int flow_steps,
                          const std::string& out) {
  classical::MapParams mp{pt.p, pt.k0, pt.k1, pt.gamma};
  classical::LyapunovOptions opts;
  opts.n_periods = n_periods;
  opts.transient = transient;
  opts.h_tol = h_tol;
  opts.variant = classical::map_variant_from_name(map_name);
  opts.flow_steps = flow_steps;
  const auto metrics = classical::grid_metrics(mp, n_ic, opts, 0);
  std::cout << "n_ic=" << metrics.per_ic.size() << " f_c=" << metrics.chaotic_fraction
            << " mean_D_L=" << metrics.mean_d_lyapunov << "\n";
  if (!out.empty()) {
    csv::Writer w(out);
    w.comment(std::string("constants_version=") + constants::kConstantsVersion);
    w.comment(std::string("code_version=") + constants::kCodeVersion);
    w.header({"ic_index", "q0", "p0", "h1", "h2", "upsilon", "d_lyapunov"});
    for (std::size_t i = 0; i < metrics.per_ic.size(); ++i) {
      const auto& m = metrics.per_ic[i];
      w.row({csv::format(i), csv::format(m.ic.q), csv::format(m.ic.p), csv::format(m.h1),
             csv::format(m.h2), csv::format(m.upsilon), csv::format(m.d_lyapunov)});
    }
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int run_lyapunov(const PointArgs& pt, double q0, double p0, int n_periods, int transient,
                 double h_tol, const std::string& map_name, int flow_steps) {
  classical::MapParams mp{pt.p, pt.k0, pt.k1, pt.gamma};
  classical::LyapunovOptions opts;
  opts.n_periods = n_periods;
  opts.transient = transient;
  opts.h_tol = h_tol;
  opts.variant = classical::map_variant_from_name(map_name);
  opts.flow_steps = flow_steps;
  const Vec3 x0 = classical::to_sphere({q0, p0});
  const auto spec = classical::lyapunov_spectrum(x0, mp, opts);
  std::cout << "h1=" << spec.h1 << " h2=" << spec.h2
            << " D_L=" << classical::lyapunov_dimension(spec, h_tol) << "\n";
  return kExitOk;
}

int run_bifurcation(const PointArgs& pt, double gamma_min, double gamma_max, int n_gamma,
                    int n_periods, int record_last, int flow_steps, const std::string& out) {
  if (n_gamma < 1) {
    throw std::invalid_argument("need at least one gamma value");
  }
  std::vector<double> gammas(n_gamma);
  for (int i = 0; i < n_gamma; ++i) {
    gammas[i] = n_gamma == 1 ? gamma_min
                             : gamma_min + (gamma_max - gamma_min) * i / (n_gamma - 1.0);
  }
  classical::MapParams mp{pt.p, pt.k0, pt.k1, 0.0};
  // The exact south pole is a fixed point of the map; start just off it.
  const Vec3 start = Vec3(1e-9, 0, -1).normalized();
  const auto rows =
      classical::bifurcation_scan(mp, gammas, start, n_periods, record_last, flow_steps);
  csv::Writer w(out);
  w.comment(std::string("constants_version=") + constants::kConstantsVersion);
  w.comment(std::string("code_version=") + constants::kCodeVersion);
  w.header({"gamma", "sample_index", "jy"});
  for (const auto& row : rows) {
    for (std::size_t s = 0; s < row.jy_samples.size(); ++s) {
      w.row({csv::format(row.gamma), csv::format(s), csv::format(row.jy_samples[s])});
    }
  }
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int run_poincare(const PointArgs& pt, const std::string& map_name, int n_ic, int n_periods,
                 int flow_steps, const std::string& out) {
  classical::MapParams mp{pt.p, pt.k0, pt.k1, pt.gamma};
  const auto initials = classical::disk_lattice(n_ic);
  const auto trajectories = classical::poincare_section(
      initials, mp, classical::map_variant_from_name(map_name), n_periods, flow_steps);
  csv::Writer w(out);
  w.comment(std::string("constants_version=") + constants::kConstantsVersion);
  w.comment(std::string("code_version=") + constants::kCodeVersion);
  w.header({"ic_index", "period", "q", "p"});
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    for (std::size_t n = 0; n < trajectories[i].size(); ++n) {
      w.row({csv::format(i), csv::format(n + 1), csv::format(trajectories[i][n].q),
             csv::format(trajectories[i][n].p)});
    }
  }
  std::cout << "wrote " << trajectories.size() << " trajectories to " << out << "\n";
  return kExitOk;
}

int run_oracle(const std::string& ensemble, int n, std::uint64_t seed, int n_seeds,
               const std::string& out) {
  spectral::RatioSamples pooled;
  for (int s = 0; s < n_seeds; ++s) {
    std::vector<Complex> points;
    if (ensemble == "ginue") {
      points = spectral::sample_ginibre_spectrum(n, seed + s);
    } else if (ensemble == "poisson2d") {
      points = spectral::sample_poisson2d(n, seed + s);
    } else {
      throw std::invalid_argument("unknown ensemble: " + ensemble);
    }
    const auto samples = spectral::complex_spacing_ratios(points);
    pooled.r.insert(pooled.r.end(), samples.r.begin(), samples.r.end());
    pooled.theta.insert(pooled.theta.end(), samples.theta.begin(), samples.theta.end());
    pooled.n_merged_duplicates += samples.n_merged_duplicates;
  }
  const auto stats = spectral::ratio_statistics(pooled);
  std::cout << "ensemble=" << ensemble << " n=" << n << " seeds=" << n_seeds
            << " mean_r=" << stats.mean_r << " neg_mean_cos=" << stats.neg_mean_cos << "\n";
  if (!out.empty()) {
    csv::Writer w(out);
    w.comment(std::string("constants_version=") + constants::kConstantsVersion);
    w.header({"ensemble", "n", "seed", "n_seeds", "n_samples", "mean_r", "neg_mean_cos"});
    w.row({ensemble, csv::format(n), csv::format(static_cast<std::size_t>(seed)),
           csv::format(n_seeds), csv::format(stats.n_samples), csv::format(stats.mean_r),
           csv::format(stats.neg_mean_cos)});
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir, int workers) {
  sweep::SweepConfig cfg = sweep::load_config(config_path);
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  if (workers > 0) cfg.workers = workers;
  if (cfg.workers == 0) cfg.workers = default_workers();
  sweep::validate(cfg);
  std::filesystem::create_directories(cfg.output.dir);
  const auto result = sweep::run_sweep(cfg);
  const auto dir = std::filesystem::path(cfg.output.dir);
  sweep::write_sweep_csv((dir / "sweep.csv").string(), cfg, result);
  sweep::write_summary_json((dir / "summary.json").string(), cfg, result);
  std::size_t failed = 0;
  for (const auto& r : result.records) {
    if (!r.error.empty()) ++failed;
  }
  std::cout << "sweep: " << result.records.size() << " points, " << failed << " failed, "
            << result.wall_total_s << " s\n"
            << "wrote " << (dir / "sweep.csv").string() << " and "
            << (dir / "summary.json").string() << "\n";
  return failed == result.records.size() && !result.records.empty() ? kExitNumerical : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dissipative kicked top laboratory"};
  app.require_subcommand(1);

  // quantum-spectrum
  auto* spec_cmd = app.add_subcommand("quantum-spectrum",
                                      "complex spectrum of the one-period propagator");
  PointArgs spec_pt;
  double spec_j = 10.0, spec_eps = constants::kPrecisionEpsilon;
  std::string spec_sector = "positive", spec_out = "spectrum.csv";
  bool spec_allow_large = false;
  add_point_options(spec_cmd, &spec_pt);
  spec_cmd->add_option("--j", spec_j, "spin magnitude (half-integer)");
  spec_cmd->add_option("--sector", spec_sector, "positive|negative|full");
  spec_cmd->add_option("--epsilon", spec_eps, "precision filter threshold");
  spec_cmd->add_option("--out", spec_out, "output CSV path");
  spec_cmd->add_flag("--allow-large", spec_allow_large, "lift the desk-scale ceiling on j");

  // ratio-stats
  auto* stats_cmd = app.add_subcommand("ratio-stats",
                                       "complex spacing-ratio statistics of a spectrum");
  PointArgs stats_pt;
  double stats_j = 10.0, stats_eps = constants::kPrecisionEpsilon;
  std::string stats_sector = "positive", stats_file, stats_out;
  bool stats_allow_large = false;
  add_point_options(stats_cmd, &stats_pt);
  stats_cmd->add_option("--j", stats_j, "spin magnitude (half-integer)");
  stats_cmd->add_option("--sector", stats_sector, "positive|negative|full|both");
  stats_cmd->add_option("--epsilon", stats_eps, "precision filter threshold");
  stats_cmd->add_option("--spectrum", stats_file, "existing spectrum CSV instead of parameters");
  stats_cmd->add_option("--out", stats_out, "statistics CSV path");
  stats_cmd->add_flag("--allow-large", stats_allow_large, "lift the desk-scale ceiling on j");

  // classical-metrics
  auto* cm_cmd = app.add_subcommand("classical-metrics",
                                    "chaotic fraction and Lyapunov dimension over a phase-space grid");
  PointArgs cm_pt;
  int cm_n_ic = 1245, cm_periods = 1000, cm_transient = 100, cm_steps = 100;
  double cm_h_tol = 1e-2;
  std::string cm_map = "coupled", cm_out;
  add_point_options(cm_cmd, &cm_pt);
  cm_cmd->add_option("--n-ic", cm_n_ic, "target number of initial conditions");
  cm_cmd->add_option("--n-periods", cm_periods, "periods per trajectory");
  cm_cmd->add_option("--transient", cm_transient, "periods excluded from averages");
  cm_cmd->add_option("--h-tol", cm_h_tol, "chaos threshold on h1");
  cm_cmd->add_option("--map", cm_map, "coupled|decoupled|isolated");
  cm_cmd->add_option("--flow-steps", cm_steps, "RK4 steps per period");
  cm_cmd->add_option("--out", cm_out, "per-IC metrics CSV path");

  // lyapunov
  auto* ly_cmd = app.add_subcommand("lyapunov", "Lyapunov spectrum of one trajectory");
  PointArgs ly_pt;
  double ly_q0 = 0.3, ly_p0 = 0.1, ly_h_tol = 1e-2;
  int ly_periods = 1000, ly_transient = 100, ly_steps = 100;
  std::string ly_map = "coupled";
  add_point_options(ly_cmd, &ly_pt);
  ly_cmd->add_option("--q0", ly_q0, "initial Q");
  ly_cmd->add_option("--p0", ly_p0, "initial P");
  ly_cmd->add_option("--n-periods", ly_periods, "periods evolved");
  ly_cmd->add_option("--transient", ly_transient, "periods excluded from averages");
  ly_cmd->add_option("--h-tol", ly_h_tol, "chaos threshold on h1");
  ly_cmd->add_option("--map", ly_map, "coupled|decoupled|isolated");
  ly_cmd->add_option("--flow-steps", ly_steps, "RK4 steps per period");

  // bifurcation
  auto* bif_cmd = app.add_subcommand("bifurcation",
                                     "J_y attractor samples against dissipation strength");
  PointArgs bif_pt;
  double bif_gmin = 0.0, bif_gmax = 2.0;
  int bif_n = 81, bif_periods = 1000, bif_last = 100, bif_steps = 100;
  std::string bif_out = "bifurcation.csv";
  add_point_options(bif_cmd, &bif_pt);
  bif_cmd->add_option("--gamma-min", bif_gmin, "first dissipation strength");
  bif_cmd->add_option("--gamma-max", bif_gmax, "last dissipation strength");
  bif_cmd->add_option("--n-gamma", bif_n, "number of dissipation strengths");
  bif_cmd->add_option("--n-periods", bif_periods, "periods per strength");
  bif_cmd->add_option("--record-last", bif_last, "recorded tail periods");
  bif_cmd->add_option("--flow-steps", bif_steps, "RK4 steps per period");
  bif_cmd->add_option("--out", bif_out, "output CSV path");

  // poincare
  auto* poin_cmd = app.add_subcommand("poincare", "stroboscopic sections in (Q,P)");
  PointArgs poin_pt;
  int poin_n_ic = 300, poin_periods = 1000, poin_steps = 100;
  std::string poin_map = "coupled", poin_out = "poincare.csv";
  add_point_options(poin_cmd, &poin_pt);
  poin_cmd->add_option("--map", poin_map, "coupled|decoupled|isolated");
  poin_cmd->add_option("--n-ic", poin_n_ic, "target number of initial conditions");
  poin_cmd->add_option("--n-periods", poin_periods, "periods per trajectory");
  poin_cmd->add_option("--flow-steps", poin_steps, "RK4 steps per period");
  poin_cmd->add_option("--out", poin_out, "output CSV path");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle",
                                        "ratio statistics of reference random ensembles");
  std::string oracle_ensemble = "ginue", oracle_out;
  int oracle_n = 2000, oracle_seeds = 1;
  std::uint64_t oracle_seed = 1;
  oracle_cmd->add_option("--ensemble", oracle_ensemble, "ginue|poisson2d")->required();
  oracle_cmd->add_option("--n", oracle_n, "matrix size / point count");
  oracle_cmd->add_option("--seed", oracle_seed, "base seed");
  oracle_cmd->add_option("--n-seeds", oracle_seeds, "number of pooled realizations");
  oracle_cmd->add_option("--out", oracle_out, "output CSV path");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep from a JSON config");
  std::string sweep_config, sweep_dir;
  int sweep_workers = 0;
  sweep_cmd->add_option("--config", sweep_config, "JSON config path")->required();
  sweep_cmd->add_option("--out", sweep_dir, "output directory (overrides config)");
  sweep_cmd->add_option("--workers", sweep_workers, "worker threads (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (spec_cmd->parsed()) {
      return run_quantum_spectrum(spec_pt, spec_j, spec_sector, spec_eps, spec_allow_large,
                                  spec_out);
    }
    if (stats_cmd->parsed()) {
      return run_ratio_stats(stats_file, stats_pt, stats_j, stats_sector, stats_eps,
                             stats_allow_large, stats_out);
    }
    if (cm_cmd->parsed()) {
      return run_classical_metrics(cm_pt, cm_n_ic, cm_periods, cm_transient, cm_h_tol, cm_map,
                                   cm_steps, cm_out);
    }
    if (ly_cmd->parsed()) {
      return run_lyapunov(ly_pt, ly_q0, ly_p0, ly_periods, ly_transient, ly_h_tol, ly_map,
                          ly_steps);
    }
    if (bif_cmd->parsed()) {
      return run_bifurcation(bif_pt, bif_gmin, bif_gmax, bif_n, bif_periods, bif_last, bif_steps,
                             bif_out);
    }
    if (poin_cmd->parsed()) {
      return run_poincare(poin_pt, poin_map, poin_n_ic, poin_periods, poin_steps, poin_out);
    }
    if (oracle_cmd->parsed()) {
      return run_oracle(oracle_ensemble, oracle_n, oracle_seed, oracle_seeds, oracle_out);
    }
    if (sweep_cmd->parsed()) {
      return run_sweep_cmd(sweep_config, sweep_dir, sweep_workers);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}
