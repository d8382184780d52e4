#pragma once

#include <cstdint>
#include <vector>

#include "ktop/types.hpp"

namespace ktop::spectral {

struct RatioSamples {
  std::vector<double> r;      // |Z_k| in [0,1]
  std::vector<double> theta;  // Arg(Z_k) in (-pi, pi]
  int n_merged_duplicates = 0;

  std::size_t size() const { return r.size(); }
};

// Nearest/next-nearest neighbour ratios Z_k = (phi_NN - phi_k)/(phi_NNN - phi_k)
// in the complex plane. Points closer than 1e-14 are merged first (count
// reported); ties are broken by position in the deduplicated input sequence.
// The default search is exhaustive; the grid-indexed variant returns
// identical results.
RatioSamples complex_spacing_ratios(const std::vector<Complex>& phis);
RatioSamples complex_spacing_ratios_grid(const std::vector<Complex>& phis);

struct RatioStatistics {
  double mean_r = 0.0;
  double neg_mean_cos = 0.0;  // -<cos theta>
  std::size_t n_samples = 0;
  // Normalized positions between the 2D Poisson (0) and GinUE (1) references;
  // only reported when the sample count is large enough to be meaningful.
  double r_c = 0.0;
  double theta_c = 0.0;
  bool normalized_valid = false;
};

RatioStatistics ratio_statistics(const RatioSamples& samples);

// Spacing density of the Ginibre unitary ensemble; the infinite product and
// sum are truncated adaptively so that omitted factors deviate from 1 by
// less than 1e-14.
double ginue_pdf(double s);

// First moment of ginue_pdf, computed once by adaptive quadrature.
double ginue_mean_spacing();

// Rescaled density s_bar * P(s_bar * s), whose first moment is 1.
double ginue_pdf_rescaled(double s);

// (pi/2) s exp(-pi s^2 / 4): unit-mean spacing density of uncorrelated
// points in the plane.
double poisson2d_pdf(double s);

// Eigenvalues of an n x n matrix with i.i.d. standard complex Gaussian
// entries. Deterministic for a fixed seed.
std::vector<Complex> sample_ginibre_spectrum(int n, std::uint64_t seed);

// n i.i.d. uniform points in the unit square, as complex numbers.
std::vector<Complex> sample_poisson2d(int n, std::uint64_t seed);

// Consecutive-gap ratios min/max on sorted real phases.
std::vector<double> real_spacing_ratios(const std::vector<double>& phis);

// Linear position of <r> between the Poisson (0) and COE (1) references.
double normalized_real_ratio(double mean_r);

}  // namespace ktop::spectral
