#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ktop/classical.hpp"
#include "ktop/liouville.hpp"
#include "ktop/spectral_stats.hpp"

namespace ktop::sweep {

struct Axes {
  std::vector<double> p{2.0};
  std::vector<double> k0{10.0};
  std::vector<double> k1{8.0};
  std::vector<double> gamma{0.1};
  std::vector<double> j{10.0};
};

// Sector handling for ratio statistics: a single parity block, the full
// spectrum, or both blocks diagonalized separately with the ratio samples
// pooled afterwards.
enum class SectorChoice { Positive, Negative, Full, Both };

const char* sector_choice_name(SectorChoice s);
SectorChoice sector_choice_from_name(const std::string& name);

struct QuantumOptions {
  bool run = true;
  SectorChoice sector = SectorChoice::Positive;
  double epsilon_filter = 1e-16;
  bool allow_large = false;  // lifts the desk-scale ceiling on j
};

struct ClassicalOptions {
  bool run = true;
  int n_ic = 1245;
  int n_periods = 1000;
  int transient = 100;
  double h_tol = 1e-2;
  classical::MapVariant map_variant = classical::MapVariant::Coupled;
  int flow_steps = 100;
};

struct OutputOptions {
  std::string dir = ".";
  std::string format = "csv";
};

struct SweepConfig {
  Axes axes;
  QuantumOptions quantum;
  ClassicalOptions classical_opts;
  OutputOptions output;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: default_workers()
};

// JSON round trip; from-JSON rejects unknown keys so configs stay honest.
SweepConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const SweepConfig& config);
SweepConfig load_config(const std::string& path);

// Throws std::invalid_argument on empty axes, negative gamma, invalid j, or
// a quantum j above the desk-scale ceiling without allow_large.
void validate(const SweepConfig& config);

// FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const SweepConfig& config);

// One quantum parameter point: propagator, spectrum per requested sector,
// precision filter, ratio statistics.
struct QuantumPointStats {
  int n_eigs = 0;                  // eigenvalues retained after filtering
  double filtered_fraction = 0.0;  // N_eps / N across the processed sectors
  int n_near_branch_cut = 0;
  spectral::RatioStatistics stats;
};

QuantumPointStats quantum_point_stats(const liouville::ModelParams& params, SectorChoice sector,
                                      double epsilon_filter);

struct SweepRecord {
  double p = 0.0, k0 = 0.0, k1 = 0.0, gamma = 0.0, j = 0.0;
  std::string sector;
  // Quantum statistics (valid when quantum_ok).
  bool quantum_ok = false;
  int n_eigs = 0;
  double filtered_fraction = 0.0;
  double mean_r = 0.0, neg_mean_cos = 0.0, r_c = 0.0, theta_c = 0.0;
  bool normalized_valid = false;
  // Classical metrics (valid when classical_ok).
  bool classical_ok = false;
  int n_ic = 0;
  double f_c = 0.0, mean_d_lyapunov = 0.0;
  // Per-point failure note; empty on success. A failing point never aborts
  // the sweep.
  std::string error;
  double wall_quantum_s = 0.0, wall_classical_s = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // ordered by the axes' Cartesian index
  std::uint64_t hash = 0;
  double wall_total_s = 0.0;
};

// Cartesian product of the axes (p, k0, k1, gamma, j; last axis fastest),
// quantum pipeline and/or classical pipeline per tuple. The reduction order
// is fixed by the grid index, so results do not depend on the worker count.
SweepResult run_sweep(const SweepConfig& config);

// The CSV carries the scientific payload only (no wall times), so identical
// configs yield byte-identical files; timing lives in the JSON summary.
void write_sweep_csv(const std::string& path, const SweepConfig& config,
                     const SweepResult& result);
void write_summary_json(const std::string& path, const SweepConfig& config,
                        const SweepResult& result);

// Statistics CSV used by the ratio-stats command.
void write_stats_csv(const std::string& path, const std::vector<SweepRecord>& records);

}  // namespace ktop::sweep
