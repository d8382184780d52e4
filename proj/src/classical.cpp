#include "ktop/classical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

#include "ktop/parallel.hpp"

namespace ktop::classical {

namespace {

// Inter-kick vector field (kick term off).
inline Vec3 flow_field(const Vec3& x, const MapParams& mp) {
  const double w = mp.p + mp.k0 * x.z();
  return Vec3(-w * x.y() + mp.gamma * x.x() * x.z(),
              w * x.x() + mp.gamma * x.y() * x.z(),
              -mp.gamma * (x.x() * x.x() + x.y() * x.y()));
}

inline Mat3 flow_field_jacobian(const Vec3& x, const MapParams& mp) {
  const double w = mp.p + mp.k0 * x.z();
  Mat3 m;
  m << mp.gamma * x.z(), -w, -mp.k0 * x.y() + mp.gamma * x.x(),
       w, mp.gamma * x.z(), mp.k0 * x.x() + mp.gamma * x.y(),
       -2.0 * mp.gamma * x.x(), -2.0 * mp.gamma * x.y(), 0.0;
  return m;
}

void check_finite(const Vec3& x, const char* where) {
  if (!x.allFinite()) {
    throw std::runtime_error(std::string(where) + ": non-finite state");
  }
}

// One RK4 step of the state together with the variational equations.
void rk4_step_tangent(Vec3& x, Mat3& m, const MapParams& mp, double h) {
  const Vec3 k1x = flow_field(x, mp);
  const Mat3 k1m = flow_field_jacobian(x, mp) * m;
  const Vec3 x2 = x + 0.5 * h * k1x;
  const Vec3 k2x = flow_field(x2, mp);
  const Mat3 k2m = flow_field_jacobian(x2, mp) * (m + 0.5 * h * k1m);
  const Vec3 x3 = x + 0.5 * h * k2x;
  const Vec3 k3x = flow_field(x3, mp);
  const Mat3 k3m = flow_field_jacobian(x3, mp) * (m + 0.5 * h * k2m);
  const Vec3 x4 = x + h * k3x;
  const Vec3 k4x = flow_field(x4, mp);
  const Mat3 k4m = flow_field_jacobian(x4, mp) * (m + h * k3m);
  x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  m += (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
}

void rk4_step(Vec3& x, const MapParams& mp, double h) {
  const Vec3 k1 = flow_field(x, mp);
  const Vec3 k2 = flow_field(Vec3(x + 0.5 * h * k1), mp);
  const Vec3 k3 = flow_field(Vec3(x + 0.5 * h * k2), mp);
  const Vec3 k4 = flow_field(Vec3(x + h * k3), mp);
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Jacobian of the kick evaluated at the pre-kick state.
Mat3 kick_jacobian(const Vec3& w, double k1) {
  const double a = k1 * w.y();
  const double c = std::cos(a), s = std::sin(a);
  const double out_x = c * w.x() + s * w.z();
  const double out_z = -s * w.x() + c * w.z();
  Mat3 m;
  m << c, k1 * out_z, s,
       0.0, 1.0, 0.0,
       -s, -k1 * out_x, c;
  return m;
}

// Pure-dissipation update over one period and its Jacobian; exactly
// norm-preserving on the unit sphere.
Vec3 dissipation_update(const Vec3& y, double gamma) {
  const double c = std::cosh(gamma), s = std::sinh(gamma);
  const double den = c - s * y.z();
  return Vec3(y.x() / den, y.y() / den, (c * y.z() - s) / den);
}

Mat3 dissipation_jacobian(const Vec3& y, double gamma) {
  const double c = std::cosh(gamma), s = std::sinh(gamma);
  const double den = c - s * y.z();
  const double den2 = den * den;
  Mat3 m;
  m << 1.0 / den, 0.0, s * y.x() / den2,
       0.0, 1.0 / den, s * y.y() / den2,
       0.0, 0.0, 1.0 / den2;
  return m;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return m;
}

}  // namespace

const char* map_variant_name(MapVariant v) {
  switch (v) {
    case MapVariant::Coupled: return "coupled";
    case MapVariant::Decoupled: return "decoupled";
    case MapVariant::Isolated: return "isolated";
  }
  return "coupled";
}

MapVariant map_variant_from_name(const std::string& name) {
  if (name == "coupled") return MapVariant::Coupled;
  if (name == "decoupled") return MapVariant::Decoupled;
  if (name == "isolated") return MapVariant::Isolated;
  throw std::invalid_argument("unknown map variant: " + name);
}

Vec3 flow_period(const Vec3& x0, const MapParams& mp, int steps) {
  if (steps < 1) {
    throw std::invalid_argument("flow_period: steps must be positive");
  }
  check_finite(x0, "flow_period");
  Vec3 x = x0;
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) rk4_step(x, mp, h);
  check_finite(x, "flow_period");
  x.normalize();
  return x;
}

Vec3 kick_map(const Vec3& x, double k1) {
  const double a = k1 * x.y();
  const double c = std::cos(a), s = std::sin(a);
  return Vec3(c * x.x() + s * x.z(), x.y(), -s * x.x() + c * x.z());
}

Vec3 stroboscopic_map(const Vec3& x, const MapParams& mp, int steps) {
  return kick_map(flow_period(x, mp, steps), mp.k1);
}

Vec3 isolated_map(const Vec3& x, double p, double k0, double k1) {
  // R(k0 Jz) R(p) collapse to a single z rotation since Jz is unchanged.
  const double a = p + k0 * x.z();
  const double c = std::cos(a), s = std::sin(a);
  const Vec3 w(c * x.x() - s * x.y(), s * x.x() + c * x.y(), x.z());
  return kick_map(w, k1);
}

Vec3 decoupled_map(const Vec3& x, const MapParams& mp) {
  return dissipation_update(isolated_map(x, mp.p, mp.k0, mp.k1), mp.gamma);
}

Vec3 apply_map(const Vec3& x, const MapParams& mp, MapVariant variant, int flow_steps) {
  switch (variant) {
    case MapVariant::Coupled: return stroboscopic_map(x, mp, flow_steps);
    case MapVariant::Decoupled: return decoupled_map(x, mp);
    case MapVariant::Isolated: return isolated_map(x, mp.p, mp.k0, mp.k1);
  }
  throw std::logic_error("apply_map: unreachable");
}

PeriodStep step_with_jacobian(const Vec3& x0, const MapParams& mp, MapVariant variant,
                              int flow_steps) {
  switch (variant) {
    case MapVariant::Coupled: {
      Vec3 x = x0;
      Mat3 m = Mat3::Identity();
      const double h = 1.0 / flow_steps;
      for (int i = 0; i < flow_steps; ++i) rk4_step_tangent(x, m, mp, h);
      check_finite(x, "step_with_jacobian");
      x.normalize();
      const Mat3 jac = kick_jacobian(x, mp.k1) * m;
      return {kick_map(x, mp.k1), jac};
    }
    case MapVariant::Isolated: {
      const double a = mp.p + mp.k0 * x0.z();
      Mat3 dz = rot_z(a);
      const Vec3 w = dz * x0;
      dz.col(2) += mp.k0 * Vec3(-w.y(), w.x(), 0.0);
      return {kick_map(w, mp.k1), Mat3(kick_jacobian(w, mp.k1) * dz)};
    }
    case MapVariant::Decoupled: {
      const PeriodStep iso = step_with_jacobian(x0, mp, MapVariant::Isolated, flow_steps);
      return {dissipation_update(iso.x, mp.gamma),
              Mat3(dissipation_jacobian(iso.x, mp.gamma) * iso.jacobian)};
    }
  }
  throw std::logic_error("step_with_jacobian: unreachable");
}

PhasePoint to_plane(const Vec3& x) {
  const double rho2 = x.x() * x.x() + x.y() * x.y();
  if (rho2 < 1e-30) {
    return x.z() >= 0.0 ? PhasePoint{2.0, 0.0} : PhasePoint{0.0, 0.0};
  }
  const double factor = std::sqrt(2.0 * std::max(1.0 + x.z(), 0.0) / rho2);
  return {x.x() * factor, -x.y() * factor};
}

Vec3 to_sphere(const PhasePoint& pp) {
  const double r2 = pp.q * pp.q + pp.p * pp.p;
  if (r2 > 4.0 + 1e-12) {
    throw std::invalid_argument("to_sphere: point outside the disk Q^2+P^2 <= 4");
  }
  const double root = std::sqrt(std::max(1.0 - 0.25 * r2, 0.0));
  return Vec3(pp.q * root, -pp.p * root, 0.5 * r2 - 1.0);
}

LyapunovSpectrum lyapunov_spectrum(const Vec3& x0, const MapParams& mp,
                                   const LyapunovOptions& opts) {
  if (opts.n_periods < 100) {
    throw std::invalid_argument("lyapunov_spectrum: need at least 100 periods");
  }
  if (opts.transient < 0 || opts.transient >= opts.n_periods) {
    throw std::invalid_argument("lyapunov_spectrum: transient must lie inside the run");
  }
  Vec3 x = x0.normalized();

  // Orthonormal tangent frame in the plane orthogonal to J.
  int axis = 0;
  x.cwiseAbs().minCoeff(&axis);
  Vec3 t1 = Vec3::Unit(axis);
  t1 -= t1.dot(x) * x;
  t1.normalize();
  Vec3 t2 = x.cross(t1);

  double sum1 = 0.0, sum2 = 0.0;
  for (int n = 0; n < opts.n_periods; ++n) {
    const PeriodStep step = step_with_jacobian(x, mp, opts.variant, opts.flow_steps);
    x = step.x;
    Vec3 v1 = step.jacobian * t1;
    Vec3 v2 = step.jacobian * t2;
    v1 -= v1.dot(x) * x;
    v2 -= v2.dot(x) * x;
    const double r1 = v1.norm();
    if (!(r1 > 1e-300)) {
      throw std::runtime_error("lyapunov_spectrum: tangent collapse");
    }
    t1 = v1 / r1;
    v2 -= v2.dot(t1) * t1;
    const double r2 = v2.norm();
    if (!(r2 > 1e-300)) {
      throw std::runtime_error("lyapunov_spectrum: tangent collapse");
    }
    t2 = v2 / r2;
    if (n >= opts.transient) {
      sum1 += std::log(r1);
      sum2 += std::log(r2);
    }
  }
  const double count = opts.n_periods - opts.transient;
  LyapunovSpectrum spec;
  spec.h1 = sum1 / count;
  spec.h2 = sum2 / count;
  if (spec.h2 > spec.h1) std::swap(spec.h1, spec.h2);
  spec.n_periods = opts.n_periods;
  spec.transient = opts.transient;
  return spec;
}

int classify(const Vec3& x0, const MapParams& mp, const LyapunovOptions& opts) {
  return lyapunov_spectrum(x0, mp, opts).h1 > opts.h_tol ? 1 : 0;
}

double lyapunov_dimension(const LyapunovSpectrum& spec, double h_tol) {
  const auto clip = [h_tol](double h) { return std::abs(h) < h_tol ? 0.0 : h; };
  const double h1 = clip(spec.h1);
  const double h2 = clip(spec.h2);
  if (h1 < 0.0) return 0.0;
  if (h1 == 0.0) return 1.0;  // limit cycle: one marginal direction
  if (h2 >= 0.0) return 2.0;
  return std::min(2.0, 1.0 + h1 / -h2);
}

std::vector<PhasePoint> disk_lattice(int target_count) {
  if (target_count < 1 || target_count > 50000) {
    throw std::invalid_argument("disk_lattice: target count out of range");
  }
  int best_n = 2;
  long best_diff = -1;
  for (int n = 2; n <= 256; ++n) {
    const double h = 4.0 / n;
    long count = 0;
    for (int i = 0; i < n; ++i) {
      const double q = -2.0 + (i + 0.5) * h;
      for (int k = 0; k < n; ++k) {
        const double p = -2.0 + (k + 0.5) * h;
        if (q * q + p * p < 4.0) ++count;
      }
    }
    const long diff = std::labs(count - target_count);
    if (best_diff < 0 || diff < best_diff) {
      best_diff = diff;
      best_n = n;
    }
    if (count > 2 * target_count + 16) break;
  }
  std::vector<PhasePoint> pts;
  const double h = 4.0 / best_n;
  for (int i = 0; i < best_n; ++i) {
    const double q = -2.0 + (i + 0.5) * h;
    for (int k = 0; k < best_n; ++k) {
      const double p = -2.0 + (k + 0.5) * h;
      if (q * q + p * p < 4.0) pts.push_back({q, p});
    }
  }
  return pts;
}

GridMetrics grid_metrics(const MapParams& mp, int target_n_ic, const LyapunovOptions& opts,
                         int workers) {
  const auto lattice = disk_lattice(target_n_ic);
  GridMetrics out;
  out.per_ic.resize(lattice.size());
  parallel_for(lattice.size(), workers, [&](std::size_t i) {
    const LyapunovSpectrum spec = lyapunov_spectrum(to_sphere(lattice[i]), mp, opts);
    IcMetrics m;
    m.ic = lattice[i];
    m.h1 = spec.h1;
    m.h2 = spec.h2;
    m.upsilon = spec.h1 > opts.h_tol ? 1 : 0;
    m.d_lyapunov = lyapunov_dimension(spec, opts.h_tol);
    out.per_ic[i] = m;
  });
  double sum_upsilon = 0.0, sum_dim = 0.0;
  for (const IcMetrics& m : out.per_ic) {
    sum_upsilon += m.upsilon;
    sum_dim += m.d_lyapunov;
  }
  out.chaotic_fraction = sum_upsilon / out.per_ic.size();
  out.mean_d_lyapunov = sum_dim / out.per_ic.size();
  return out;
}

double chaotic_fraction(const MapParams& mp, int target_n_ic, const LyapunovOptions& opts,
                        int workers) {
  return grid_metrics(mp, target_n_ic, opts, workers).chaotic_fraction;
}

BoxCountResult hausdorff_dimension(const std::vector<PhasePoint>& trajectory, double eps_min,
                                   double eps_max, int n_eps) {
  if (trajectory.empty()) {
    throw std::invalid_argument("hausdorff_dimension: empty trajectory");
  }
  if (!(eps_min > 0.0) || !(eps_max > eps_min) || n_eps < 2) {
    throw std::invalid_argument("hausdorff_dimension: bad cell-size range");
  }
  BoxCountResult out;
  out.counts.reserve(n_eps);
  std::vector<std::int64_t> keys;
  keys.reserve(trajectory.size());
  for (int e = 0; e < n_eps; ++e) {
    const double t = static_cast<double>(e) / (n_eps - 1);
    const double eps = std::exp2(std::log2(eps_min) + t * (std::log2(eps_max) - std::log2(eps_min)));
    const std::int64_t n_side = static_cast<std::int64_t>(std::ceil(4.0 / eps)) + 1;
    keys.clear();
    for (const PhasePoint& pp : trajectory) {
      const auto ix = std::min<std::int64_t>(
          n_side - 1, std::max<std::int64_t>(0, static_cast<std::int64_t>((pp.q + 2.0) / eps)));
      const auto iy = std::min<std::int64_t>(
          n_side - 1, std::max<std::int64_t>(0, static_cast<std::int64_t>((pp.p + 2.0) / eps)));
      keys.push_back(iy * (n_side + 1) + ix);
    }
    std::sort(keys.begin(), keys.end());
    const std::size_t cells = std::unique(keys.begin(), keys.end()) - keys.begin();
    out.counts.push_back({eps, cells});
  }
  // Least squares of ln C against ln(1/eps).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& pt : out.counts) {
    const double lx = -std::log(pt.epsilon);
    const double ly = std::log(static_cast<double>(pt.cells));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(out.counts.size());
  const double denom = n * sxx - sx * sx;
  out.dimension = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - out.dimension * sx) / n;
  double ss = 0.0;
  for (const auto& pt : out.counts) {
    const double lx = -std::log(pt.epsilon);
    const double ly = std::log(static_cast<double>(pt.cells));
    const double res = ly - (intercept + out.dimension * lx);
    ss += res * res;
  }
  out.fit_residual = std::sqrt(ss / n);
  return out;
}

std::vector<BifurcationRow> bifurcation_scan(const MapParams& base,
                                             const std::vector<double>& gammas, const Vec3& x0,
                                             int n_periods, int record_last, int flow_steps,
                                             int workers) {
  if (record_last > n_periods) {
    throw std::invalid_argument("bifurcation_scan: record window longer than the run");
  }
  std::vector<BifurcationRow> rows(gammas.size());
  parallel_for(gammas.size(), workers, [&](std::size_t i) {
    MapParams mp = base;
    mp.gamma = gammas[i];
    BifurcationRow row;
    row.gamma = mp.gamma;
    row.conservative = mp.gamma == 0.0;
    row.jy_samples.reserve(record_last);
    Vec3 x = x0.normalized();
    for (int n = 0; n < n_periods; ++n) {
      x = stroboscopic_map(x, mp, flow_steps);
      if (n >= n_periods - record_last) {
        row.jy_samples.push_back(x.y());
      }
    }
    rows[i] = std::move(row);
  });
  return rows;
}

std::vector<std::vector<PhasePoint>> poincare_section(const std::vector<PhasePoint>& initials,
                                                      const MapParams& mp, MapVariant variant,
                                                      int n_periods, int flow_steps,
                                                      int workers) {
  std::vector<std::vector<PhasePoint>> out(initials.size());
  parallel_for(initials.size(), workers, [&](std::size_t i) {
    std::vector<PhasePoint> traj;
    traj.reserve(n_periods);
    Vec3 x = to_sphere(initials[i]);
    for (int n = 0; n < n_periods; ++n) {
      x = apply_map(x, mp, variant, flow_steps);
      traj.push_back(to_plane(x));
    }
    out[i] = std::move(traj);
  });
  return out;
}

}  // namespace ktop::classical
