#include "ktop/sweep.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "ktop/constants.hpp"
#include "ktop/csv.hpp"
#include "ktop/parallel.hpp"
#include "ktop/spectral_stats.hpp"

namespace ktop::sweep {

namespace {

using nlohmann::json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json axes_to_json(const Axes& a) {
  return json{{"p", a.p}, {"k0", a.k0}, {"k1", a.k1}, {"gamma", a.gamma}, {"j", a.j}};
}

void expect_keys(const json& obj, std::initializer_list<const char*> keys,
                 const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown config key '" + key + "' in " + where);
    }
  }
}

}  // namespace

const char* sector_choice_name(SectorChoice s) {
  switch (s) {
    case SectorChoice::Positive: return "positive";
    case SectorChoice::Negative: return "negative";
    case SectorChoice::Full: return "full";
    case SectorChoice::Both: return "both";
  }
  return "positive";
}

SectorChoice sector_choice_from_name(const std::string& name) {
  if (name == "positive") return SectorChoice::Positive;
  if (name == "negative") return SectorChoice::Negative;
  if (name == "full") return SectorChoice::Full;
  if (name == "both") return SectorChoice::Both;
  throw std::invalid_argument("unknown sector: " + name);
}

QuantumPointStats quantum_point_stats(const liouville::ModelParams& params, SectorChoice sector,
                                      double epsilon_filter) {
  const CMatrix d = liouville::dissipative_floquet(params);
  std::vector<liouville::Sector> sectors;
  switch (sector) {
    case SectorChoice::Positive: sectors = {liouville::Sector::Positive}; break;
    case SectorChoice::Negative: sectors = {liouville::Sector::Negative}; break;
    case SectorChoice::Full: sectors = {liouville::Sector::Full}; break;
    case SectorChoice::Both:
      sectors = {liouville::Sector::Positive, liouville::Sector::Negative};
      break;
  }
  QuantumPointStats out;
  spectral::RatioSamples pooled;
  Eigen::Index n_total = 0;
  Eigen::Index n_removed = 0;
  for (const auto s : sectors) {
    const auto spec = liouville::spectrum(d, s);
    n_total += spec.eigenvalues.size();
    const auto [kept, fraction] = liouville::precision_filter(spec, epsilon_filter);
    n_removed += kept.n_filtered;
    out.n_eigs += static_cast<int>(kept.eigenvalues.size());
    out.n_near_branch_cut += kept.n_near_branch_cut;
    const std::vector<Complex> phis(kept.eigenphases.data(),
                                    kept.eigenphases.data() + kept.eigenphases.size());
    const auto samples = spectral::complex_spacing_ratios(phis);
    pooled.r.insert(pooled.r.end(), samples.r.begin(), samples.r.end());
    pooled.theta.insert(pooled.theta.end(), samples.theta.begin(), samples.theta.end());
    pooled.n_merged_duplicates += samples.n_merged_duplicates;
  }
  out.filtered_fraction = n_total > 0 ? static_cast<double>(n_removed) / n_total : 0.0;
  out.stats = spectral::ratio_statistics(pooled);
  return out;
}

SweepConfig config_from_json_text(const std::string& text) {
  json root = json::parse(text);
  expect_keys(root, {"axes", "quantum", "classical", "output", "seed", "workers"}, "config");
  SweepConfig cfg;
  if (root.contains("axes")) {
    const json& a = root["axes"];
    expect_keys(a, {"p", "k0", "k1", "gamma", "j"}, "axes");
    if (a.contains("p")) cfg.axes.p = a["p"].get<std::vector<double>>();
    if (a.contains("k0")) cfg.axes.k0 = a["k0"].get<std::vector<double>>();
    if (a.contains("k1")) cfg.axes.k1 = a["k1"].get<std::vector<double>>();
    if (a.contains("gamma")) cfg.axes.gamma = a["gamma"].get<std::vector<double>>();
    if (a.contains("j")) cfg.axes.j = a["j"].get<std::vector<double>>();
  }
  if (root.contains("quantum")) {
    const json& q = root["quantum"];
    expect_keys(q, {"run", "sector", "epsilon_filter", "allow_large"}, "quantum");
    if (q.contains("run")) cfg.quantum.run = q["run"].get<bool>();
    if (q.contains("sector")) {
      cfg.quantum.sector = sector_choice_from_name(q["sector"].get<std::string>());
    }
    if (q.contains("epsilon_filter")) cfg.quantum.epsilon_filter = q["epsilon_filter"].get<double>();
    if (q.contains("allow_large")) cfg.quantum.allow_large = q["allow_large"].get<bool>();
  }
  if (root.contains("classical")) {
    const json& c = root["classical"];
    expect_keys(c, {"run", "n_ic", "n_periods", "transient", "h_tol", "map_variant", "flow_steps"},
                "classical");
    if (c.contains("run")) cfg.classical_opts.run = c["run"].get<bool>();
    if (c.contains("n_ic")) cfg.classical_opts.n_ic = c["n_ic"].get<int>();
    if (c.contains("n_periods")) cfg.classical_opts.n_periods = c["n_periods"].get<int>();
    if (c.contains("transient")) cfg.classical_opts.transient = c["transient"].get<int>();
    if (c.contains("h_tol")) cfg.classical_opts.h_tol = c["h_tol"].get<double>();
    if (c.contains("map_variant")) {
      cfg.classical_opts.map_variant =
          classical::map_variant_from_name(c["map_variant"].get<std::string>());
    }
    if (c.contains("flow_steps")) cfg.classical_opts.flow_steps = c["flow_steps"].get<int>();
  }
  if (root.contains("output")) {
    const json& o = root["output"];
    expect_keys(o, {"dir", "format"}, "output");
    if (o.contains("dir")) cfg.output.dir = o["dir"].get<std::string>();
    if (o.contains("format")) cfg.output.format = o["format"].get<std::string>();
  }
  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("workers")) cfg.workers = root["workers"].get<int>();
  return cfg;
}

std::string config_to_json_text(const SweepConfig& cfg) {
  json root;
  root["axes"] = axes_to_json(cfg.axes);
  root["quantum"] = {{"run", cfg.quantum.run},
                     {"sector", sector_choice_name(cfg.quantum.sector)},
                     {"epsilon_filter", cfg.quantum.epsilon_filter},
                     {"allow_large", cfg.quantum.allow_large}};
  root["classical"] = {{"run", cfg.classical_opts.run},
                       {"n_ic", cfg.classical_opts.n_ic},
                       {"n_periods", cfg.classical_opts.n_periods},
                       {"transient", cfg.classical_opts.transient},
                       {"h_tol", cfg.classical_opts.h_tol},
                       {"map_variant", classical::map_variant_name(cfg.classical_opts.map_variant)},
                       {"flow_steps", cfg.classical_opts.flow_steps}};
  root["output"] = {{"dir", cfg.output.dir}, {"format", cfg.output.format}};
  root["seed"] = cfg.seed;
  root["workers"] = cfg.workers;
  return root.dump(2);
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

void validate(const SweepConfig& cfg) {
  const auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(!cfg.axes.p.empty() && !cfg.axes.k0.empty() && !cfg.axes.k1.empty() &&
              !cfg.axes.gamma.empty() && !cfg.axes.j.empty(),
          "config: every axis must be non-empty");
  for (double g : cfg.axes.gamma) require(g >= 0.0, "config: gamma must be non-negative");
  for (double jv : cfg.axes.j) {
    spin::SpinJ j(jv);  // validates half-integer
    if (cfg.quantum.run && !cfg.quantum.allow_large) {
      require(jv <= constants::kMaxDeskScaleSpin,
              "config: quantum j above the desk-scale ceiling; set allow_large to override");
    }
  }
  require(cfg.classical_opts.n_ic >= 1, "config: n_ic must be positive");
  require(cfg.classical_opts.n_periods >= 100, "config: n_periods must be at least 100");
  require(cfg.classical_opts.transient >= 0 &&
              cfg.classical_opts.transient < cfg.classical_opts.n_periods,
          "config: transient must lie inside the run");
  require(cfg.classical_opts.flow_steps >= 1, "config: flow_steps must be positive");
  require(cfg.quantum.epsilon_filter > 0.0, "config: epsilon_filter must be positive");
  require(cfg.output.format == "csv", "config: only csv output is supported");
}

std::uint64_t config_hash(const SweepConfig& cfg) {
  const std::string text = config_to_json_text(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

SweepRecord evaluate_point(const SweepConfig& cfg, double p, double k0, double k1, double gamma,
                           double jv) {
  SweepRecord rec;
  rec.p = p;
  rec.k0 = k0;
  rec.k1 = k1;
  rec.gamma = gamma;
  rec.j = jv;
  rec.sector = sector_choice_name(cfg.quantum.sector);

  if (cfg.quantum.run) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (gamma > constants::kGammaPrecisionThreshold) {
        std::cerr << "warning: gamma=" << gamma
                  << " is beyond the validated precision regime (0 < gamma <= "
                  << constants::kGammaPrecisionThreshold << ")\n";
      }
      liouville::ModelParams mp{p, k0, k1, gamma, spin::SpinJ(jv)};
      const auto point = quantum_point_stats(mp, cfg.quantum.sector, cfg.quantum.epsilon_filter);
      rec.quantum_ok = true;
      rec.n_eigs = point.n_eigs;
      rec.filtered_fraction = point.filtered_fraction;
      rec.mean_r = point.stats.mean_r;
      rec.neg_mean_cos = point.stats.neg_mean_cos;
      rec.r_c = point.stats.r_c;
      rec.theta_c = point.stats.theta_c;
      rec.normalized_valid = point.stats.normalized_valid;
    } catch (const std::exception& e) {
      rec.error = std::string("quantum: ") + e.what();
    }
    rec.wall_quantum_s = seconds_since(t0);
  }

  if (cfg.classical_opts.run) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      classical::MapParams mp{p, k0, k1, gamma};
      classical::LyapunovOptions opts;
      opts.n_periods = cfg.classical_opts.n_periods;
      opts.transient = cfg.classical_opts.transient;
      opts.h_tol = cfg.classical_opts.h_tol;
      opts.variant = cfg.classical_opts.map_variant;
      opts.flow_steps = cfg.classical_opts.flow_steps;
      const auto metrics =
          classical::grid_metrics(mp, cfg.classical_opts.n_ic, opts, cfg.workers);
      rec.classical_ok = true;
      rec.n_ic = static_cast<int>(metrics.per_ic.size());
      rec.f_c = metrics.chaotic_fraction;
      rec.mean_d_lyapunov = metrics.mean_d_lyapunov;
    } catch (const std::exception& e) {
      if (!rec.error.empty()) rec.error += "; ";
      rec.error += std::string("classical: ") + e.what();
    }
    rec.wall_classical_s = seconds_since(t0);
  }
  return rec;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult result;
  result.hash = config_hash(cfg);
  for (double p : cfg.axes.p)
    for (double k0 : cfg.axes.k0)
      for (double k1 : cfg.axes.k1)
        for (double gamma : cfg.axes.gamma)
          for (double jv : cfg.axes.j)
            result.records.push_back(evaluate_point(cfg, p, k0, k1, gamma, jv));
  result.wall_total_s = seconds_since(t0);
  return result;
}

namespace {

void write_metadata(csv::Writer& w, const SweepConfig& cfg) {
  w.comment("config_hash=" + std::to_string(config_hash(cfg)));
  w.comment(std::string("constants_version=") + constants::kConstantsVersion);
  w.comment(std::string("code_version=") + constants::kCodeVersion);
}

std::vector<std::string> stats_fields(const SweepRecord& r) {
  return {csv::format(r.p),
          csv::format(r.k0),
          csv::format(r.k1),
          csv::format(r.gamma),
          csv::format(r.j),
          r.sector,
          csv::format(r.n_eigs),
          csv::format(r.filtered_fraction),
          csv::format(r.mean_r),
          csv::format(r.neg_mean_cos),
          r.normalized_valid ? csv::format(r.r_c) : "",
          r.normalized_valid ? csv::format(r.theta_c) : ""};
}

}  // namespace

void write_stats_csv(const std::string& path, const std::vector<SweepRecord>& records) {
  csv::Writer w(path);
  w.comment(std::string("constants_version=") + constants::kConstantsVersion);
  w.comment(std::string("code_version=") + constants::kCodeVersion);
  w.header({"p", "k0", "k1", "gamma", "j", "sector", "n_eigs", "n_filtered", "mean_r",
            "neg_mean_cos", "R_c", "Theta_c"});
  for (const auto& r : records) w.row(stats_fields(r));
}

// Wall times are deliberately kept out of this file (they live in the JSON
// summary) so identical configs produce byte-identical CSVs.
void write_sweep_csv(const std::string& path, const SweepConfig& cfg, const SweepResult& result) {
  csv::Writer w(path);
  write_metadata(w, cfg);
  w.header({"p", "k0", "k1", "gamma", "j", "sector", "n_eigs", "filtered_fraction", "mean_r",
            "neg_mean_cos", "R_c", "Theta_c", "n_ic", "f_c", "mean_d_lyapunov", "status",
            "code_version"});
  for (const auto& r : result.records) {
    w.row({csv::format(r.p), csv::format(r.k0), csv::format(r.k1), csv::format(r.gamma),
           csv::format(r.j), r.sector, csv::format(r.n_eigs), csv::format(r.filtered_fraction),
           r.quantum_ok ? csv::format(r.mean_r) : "", r.quantum_ok ? csv::format(r.neg_mean_cos) : "",
           r.quantum_ok && r.normalized_valid ? csv::format(r.r_c) : "",
           r.quantum_ok && r.normalized_valid ? csv::format(r.theta_c) : "",
           csv::format(r.n_ic), r.classical_ok ? csv::format(r.f_c) : "",
           r.classical_ok ? csv::format(r.mean_d_lyapunov) : "",
           r.error.empty() ? "ok" : r.error, constants::kCodeVersion});
  }
}

void write_summary_json(const std::string& path, const SweepConfig& cfg,
                        const SweepResult& result) {
  json summary;
  summary["config"] = json::parse(config_to_json_text(cfg));
  summary["config_hash"] = config_hash(cfg);
  summary["constants_version"] = constants::kConstantsVersion;
  summary["code_version"] = constants::kCodeVersion;
  summary["n_points"] = result.records.size();
  std::size_t n_failed = 0;
  for (const auto& r : result.records) {
    if (!r.error.empty()) ++n_failed;
  }
  summary["n_failed"] = n_failed;
  summary["wall_total_s"] = result.wall_total_s;
  json points = json::array();
  for (const auto& r : result.records) {
    points.push_back({{"p", r.p},
                      {"k0", r.k0},
                      {"k1", r.k1},
                      {"gamma", r.gamma},
                      {"j", r.j},
                      {"status", r.error.empty() ? "ok" : r.error},
                      {"wall_quantum_s", r.wall_quantum_s},
                      {"wall_classical_s", r.wall_classical_s}});
  }
  summary["points"] = points;
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  out << summary.dump(2) << "\n";
}

}  // namespace ktop::sweep
