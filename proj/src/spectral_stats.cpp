#include "ktop/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ktop/constants.hpp"

namespace ktop::spectral {

namespace {

constexpr double kMergeDistance = 1e-14;

// Greedy deduplication in input order: a point is dropped when it lies within
// kMergeDistance of an already-kept one. Tie-breaking downstream refers to
// positions in the kept sequence.
std::vector<Complex> deduplicate(const std::vector<Complex>& phis, int* n_merged) {
  std::vector<Complex> kept;
  kept.reserve(phis.size());
  int merged = 0;
  for (const Complex& z : phis) {
    bool duplicate = false;
    for (const Complex& w : kept) {
      if (std::abs(z - w) < kMergeDistance) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      ++merged;
    } else {
      kept.push_back(z);
    }
  }
  if (n_merged != nullptr) *n_merged = merged;
  return kept;
}

struct Neighbours {
  double d2_nn = std::numeric_limits<double>::infinity();
  double d2_nnn = std::numeric_limits<double>::infinity();
  std::size_t i_nn = 0;
  std::size_t i_nnn = 0;

  void offer(double d2, std::size_t idx) {
    if (d2 < d2_nn || (d2 == d2_nn && idx < i_nn)) {
      d2_nnn = d2_nn;
      i_nnn = i_nn;
      d2_nn = d2;
      i_nn = idx;
    } else if (d2 < d2_nnn || (d2 == d2_nnn && idx < i_nnn)) {
      d2_nnn = d2;
      i_nnn = idx;
    }
  }
};

RatioSamples ratios_from_neighbours(const std::vector<Complex>& pts,
                                    const std::vector<Neighbours>& nb, int n_merged) {
  RatioSamples out;
  out.n_merged_duplicates = n_merged;
  out.r.reserve(pts.size());
  out.theta.reserve(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Complex num = pts[nb[k].i_nn] - pts[k];
    const Complex den = pts[nb[k].i_nnn] - pts[k];
    if (std::abs(den) == 0.0) {
      throw std::runtime_error("complex_spacing_ratios: next-nearest neighbour at zero distance");
    }
    const Complex z = num / den;
    out.r.push_back(std::abs(z));
    out.theta.push_back(std::arg(z));
  }
  return out;
}

}  // namespace

RatioSamples complex_spacing_ratios(const std::vector<Complex>& phis) {
  int n_merged = 0;
  const auto pts = deduplicate(phis, &n_merged);
  const std::size_t n = pts.size();
  if (n < 3) {
    throw std::invalid_argument("complex_spacing_ratios: need at least 3 distinct points");
  }
  std::vector<Neighbours> nb(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      nb[k].offer(std::norm(pts[i] - pts[k]), i);
    }
  }
  return ratios_from_neighbours(pts, nb, n_merged);
}

RatioSamples complex_spacing_ratios_grid(const std::vector<Complex>& phis) {
  int n_merged = 0;
  const auto pts = deduplicate(phis, &n_merged);
  const std::size_t n = pts.size();
  if (n < 3) {
    throw std::invalid_argument("complex_spacing_ratios: need at least 3 distinct points");
  }

  double min_x = pts[0].real(), max_x = pts[0].real();
  double min_y = pts[0].imag(), max_y = pts[0].imag();
  for (const Complex& z : pts) {
    min_x = std::min(min_x, z.real());
    max_x = std::max(max_x, z.real());
    min_y = std::min(min_y, z.imag());
    max_y = std::max(max_y, z.imag());
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n) / 2.0)));
  const double cell_x = std::max((max_x - min_x) / side, kMergeDistance);
  const double cell_y = std::max((max_y - min_y) / side, kMergeDistance);
  auto cell_of = [&](const Complex& z) {
    const int cx = std::min(side - 1, static_cast<int>((z.real() - min_x) / cell_x));
    const int cy = std::min(side - 1, static_cast<int>((z.imag() - min_y) / cell_y));
    return std::pair<int, int>(cx, cy);
  };
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(side) * side);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [cx, cy] = cell_of(pts[i]);
    buckets[static_cast<std::size_t>(cy) * side + cx].push_back(i);
  }

  std::vector<Neighbours> nb(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [cx, cy] = cell_of(pts[k]);
    for (int ring = 0; ring < side; ++ring) {
      // Cells at Chebyshev distance `ring` are at least (ring-1) cells away
      // in either axis, which bounds the distance to any point in them.
      if (ring > 1) {
        const double gap_x = (ring - 1) * cell_x;
        const double gap_y = (ring - 1) * cell_y;
        const double bound = std::min(gap_x, gap_y);
        if (bound * bound > nb[k].d2_nnn) break;
      }
      const int lo_x = cx - ring, hi_x = cx + ring;
      const int lo_y = cy - ring, hi_y = cy + ring;
      for (int by = std::max(0, lo_y); by <= std::min(side - 1, hi_y); ++by) {
        for (int bx = std::max(0, lo_x); bx <= std::min(side - 1, hi_x); ++bx) {
          if (ring > 0 && bx != lo_x && bx != hi_x && by != lo_y && by != hi_y) continue;
          for (std::size_t i : buckets[static_cast<std::size_t>(by) * side + bx]) {
            if (i == k) continue;
            nb[k].offer(std::norm(pts[i] - pts[k]), i);
          }
        }
      }
    }
  }
  return ratios_from_neighbours(pts, nb, n_merged);
}

RatioStatistics ratio_statistics(const RatioSamples& samples) {
  const std::size_t n = samples.size();
  if (n == 0) {
    throw std::invalid_argument("ratio_statistics: empty sample set");
  }
  double sum_r = 0.0;
  double sum_cos = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sum_r += samples.r[k];
    sum_cos += std::cos(samples.theta[k]);
  }
  RatioStatistics stats;
  stats.n_samples = n;
  stats.mean_r = sum_r / n;
  stats.neg_mean_cos = -sum_cos / n;
  stats.normalized_valid = n >= static_cast<std::size_t>(constants::kMinSamplesForNormalized);
  if (stats.normalized_valid) {
    stats.r_c = (stats.mean_r - constants::kMeanR2dPoisson) /
                (constants::kMeanRGinue - constants::kMeanR2dPoisson);
    stats.theta_c = stats.neg_mean_cos / constants::kNegMeanCosGinue;
  }
  return stats;
}

namespace {

// Adaptive Simpson quadrature.
double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double integrate_recursive(const F& f, double a, double m, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return integrate_recursive(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         integrate_recursive(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return integrate_recursive(f, a, m, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 40);
}

}  // namespace

double ginue_pdf(double s) {
  if (s < 0.0) {
    throw std::invalid_argument("ginue_pdf: s must be non-negative");
  }
  if (s == 0.0) return 0.0;
  const double x = s * s;
  const double t0 = std::exp(-x);
  if (t0 == 0.0) return 0.0;  // far tail, below double range
  // Regularized upper incomplete gamma by recursion:
  //   Gamma(1+k, x)/k! = e^{-x} sum_{m<=k} x^m/m!.
  // Factors with k well past x are within 1e-14 of 1 and are dropped.
  const int k_max = static_cast<int>(std::ceil(x + 10.0 * std::sqrt(x) + 30.0));
  double term = t0;      // e^{-x} x^k / k!
  double q = t0;         // running regularized sum, k = 0
  double product = 1.0;
  double sum = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    term *= x / k;
    q += term;
    const double factor = std::min(q, 1.0);
    product *= factor;
    sum += 2.0 * s * term / factor;
    if (k > x && 1.0 - q < 1e-14 && term < 1e-18) break;
  }
  return product * sum;
}

double ginue_mean_spacing() {
  static const double value =
      integrate([](double s) { return s * ginue_pdf(s); }, 0.0, 9.0, 1e-11);
  return value;
}

double ginue_pdf_rescaled(double s) {
  const double sbar = ginue_mean_spacing();
  return sbar * ginue_pdf(sbar * s);
}

double poisson2d_pdf(double s) {
  if (s < 0.0) {
    throw std::invalid_argument("poisson2d_pdf: s must be non-negative");
  }
  constexpr double pi = 3.14159265358979323846;
  return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
}

namespace {

// Samplers avoid std distributions so that a fixed seed yields the same
// stream on every standard library.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::pair<double, double> normal_pair(std::mt19937_64& rng) {
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return {radius * std::cos(two_pi * u2), radius * std::sin(two_pi * u2)};
}

}  // namespace

std::vector<Complex> sample_ginibre_spectrum(int n, std::uint64_t seed) {
  if (n < 16) {
    throw std::invalid_argument("sample_ginibre_spectrum: n must be at least 16");
  }
  std::mt19937_64 rng(seed);
  CMatrix a(n, n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = 0; row < n; ++row) {
      const auto [g1, g2] = normal_pair(rng);
      a(row, col) = Complex(g1, g2) * inv_sqrt2;
    }
  }
  Eigen::ComplexEigenSolver<CMatrix> es;
  es.compute(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sample_ginibre_spectrum: eigensolver did not converge");
  }
  std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return out;
}

std::vector<Complex> sample_poisson2d(int n, std::uint64_t seed) {
  if (n < 16) {
    throw std::invalid_argument("sample_poisson2d: n must be at least 16");
  }
  std::mt19937_64 rng(seed);
  std::vector<Complex> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = uniform01(rng);
    const double y = uniform01(rng);
    out.emplace_back(x, y);
  }
  return out;
}

std::vector<double> real_spacing_ratios(const std::vector<double>& phis) {
  if (phis.size() < 3) {
    throw std::invalid_argument("real_spacing_ratios: need at least 3 phases");
  }
  std::vector<double> sorted = phis;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(sorted.size() - 2);
  for (std::size_t k = 1; k + 1 < sorted.size(); ++k) {
    const double d_prev = sorted[k] - sorted[k - 1];
    const double d_next = sorted[k + 1] - sorted[k];
    const double hi = std::max(d_prev, d_next);
    if (hi == 0.0) continue;  // degenerate triple
    out.push_back(std::min(d_prev, d_next) / hi);
  }
  return out;
}

double normalized_real_ratio(double mean_r) {
  return (mean_r - constants::kMeanRealRatioPoisson) /
         (constants::kMeanRealRatioCoe - constants::kMeanRealRatioPoisson);
}

}  // namespace ktop::spectral
