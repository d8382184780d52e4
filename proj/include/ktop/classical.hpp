#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ktop/types.hpp"

namespace ktop::classical {

struct MapParams {
  double p = 0.0;
  double k0 = 0.0;
  double k1 = 0.0;
  double gamma = 0.0;
};

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

enum class MapVariant { Coupled, Decoupled, Isolated };

const char* map_variant_name(MapVariant v);
MapVariant map_variant_from_name(const std::string& name);

// Continuous inter-kick segment (kick term off): fixed-step RK4 over one
// unit period, |J| renormalized at the period end.
Vec3 flow_period(const Vec3& x, const MapParams& params, int steps = 100);

// Discrete kick: rotation about the y axis by angle k1 * Jy.
Vec3 kick_map(const Vec3& x, double k1);

// One full period of the coupled-dissipation dynamics: flow, then kick.
Vec3 stroboscopic_map(const Vec3& x, const MapParams& params, int steps = 100);

// Closed-form map of the undamped top: z-rotation by p + k0*Jz followed by
// the kick rotation. Exactly norm-preserving.
Vec3 isolated_map(const Vec3& x, double p, double k0, double k1);

// Isolated map followed by the closed-form pure-dissipation update; agrees
// with the coupled map to O(gamma^2) per period.
Vec3 decoupled_map(const Vec3& x, const MapParams& params);

Vec3 apply_map(const Vec3& x, const MapParams& params, MapVariant variant, int flow_steps = 100);

// One period together with its 3x3 tangent map. The flow part integrates the
// variational equations on the same RK4 grid; the kick and the decoupled
// dissipation update use their analytic Jacobians.
struct PeriodStep {
  Vec3 x;
  Mat3 jacobian;
};
PeriodStep step_with_jacobian(const Vec3& x, const MapParams& params, MapVariant variant,
                              int flow_steps = 100);

// Area-preserving chart of the unit sphere: the south pole maps to the
// origin, the north pole to the boundary circle Q^2 + P^2 = 4 (convention:
// (2, 0) for the exact pole).
PhasePoint to_plane(const Vec3& x);
Vec3 to_sphere(const PhasePoint& pp);

struct LyapunovSpectrum {
  double h1 = 0.0;  // per period, h1 >= h2
  double h2 = 0.0;
  int n_periods = 0;
  int transient = 0;
};

struct LyapunovOptions {
  int n_periods = 1000;  // total periods evolved
  int transient = 100;   // leading periods excluded from the averages
  int flow_steps = 100;
  double h_tol = 1e-2;   // chaos threshold on h1, per period (finite-time bias of regular
                         // orbits at 10^3 periods is a few 1e-3)
  MapVariant variant = MapVariant::Coupled;
};

// Two-exponent spectrum from tangent-space evolution: tangent vectors are
// projected onto the plane orthogonal to J after each period and
// re-orthonormalized (QR); exponents are averaged log stretch factors.
LyapunovSpectrum lyapunov_spectrum(const Vec3& x0, const MapParams& params,
                                   const LyapunovOptions& opts = {});

// 1 when the maximal exponent exceeds the threshold, else 0.
int classify(const Vec3& x0, const MapParams& params, const LyapunovOptions& opts = {});

// Kaplan-Yorke dimension of a two-exponent spectrum; exponents within h_tol
// of zero are treated as exactly zero, and the result is capped at 2.
double lyapunov_dimension(const LyapunovSpectrum& spec, double h_tol = 1e-2);

// Uniform square lattice clipped to the open disk Q^2 + P^2 < 4, pitch tuned
// to approximate target_count points.
std::vector<PhasePoint> disk_lattice(int target_count);

struct IcMetrics {
  PhasePoint ic;
  double h1 = 0.0;
  double h2 = 0.0;
  int upsilon = 0;
  double d_lyapunov = 0.0;
};

struct GridMetrics {
  double chaotic_fraction = 0.0;    // f_c: mean of upsilon over the lattice
  double mean_d_lyapunov = 0.0;
  std::vector<IcMetrics> per_ic;    // ordered by lattice index
};

GridMetrics grid_metrics(const MapParams& params, int target_n_ic,
                         const LyapunovOptions& opts = {}, int workers = 0);

// Convenience: just f_c.
double chaotic_fraction(const MapParams& params, int target_n_ic,
                        const LyapunovOptions& opts = {}, int workers = 0);

struct BoxCountPoint {
  double epsilon = 0.0;
  std::size_t cells = 0;
};

struct BoxCountResult {
  double dimension = 0.0;
  double fit_residual = 0.0;  // rms residual of the log-log fit
  std::vector<BoxCountPoint> counts;
};

// Box-counting dimension over [-2,2]^2 with the grid anchored at (-2,-2);
// least-squares slope of ln C against ln(1/eps) over n_eps log-spaced cell
// sizes in [eps_min, eps_max].
BoxCountResult hausdorff_dimension(const std::vector<PhasePoint>& trajectory,
                                   double eps_min = std::pow(2.0, -5.05),
                                   double eps_max = std::pow(2.0, -3.0), int n_eps = 9);

struct BifurcationRow {
  double gamma = 0.0;
  std::vector<double> jy_samples;  // J_y over the recorded tail periods
  bool conservative = false;       // gamma == 0: no attractor to settle onto
};

std::vector<BifurcationRow> bifurcation_scan(const MapParams& base,
                                             const std::vector<double>& gammas,
                                             const Vec3& x0 = Vec3(0, 0, -1),
                                             int n_periods = 1000, int record_last = 100,
                                             int flow_steps = 100, int workers = 0);

// Stroboscopic (Q,P) records, one trajectory per initial condition.
std::vector<std::vector<PhasePoint>> poincare_section(const std::vector<PhasePoint>& initials,
                                                      const MapParams& params,
                                                      MapVariant variant, int n_periods,
                                                      int flow_steps = 100, int workers = 0);

}  // namespace ktop::classical
