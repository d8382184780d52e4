#pragma once

namespace ktop::constants {

// Reference spacing-ratio statistics used to classify complex spectra.
// All acceptance comparisons are anchored to this table; do not scatter
// copies of these numbers through the code.
inline constexpr double kMeanR2dPoisson = 2.0 / 3.0;
inline constexpr double kNegMeanCos2dPoisson = 0.0;
inline constexpr double kMeanRGinue = 0.74;
inline constexpr double kNegMeanCosGinue = 0.24;

// Real (isolated Floquet) ratio references.
inline constexpr double kMeanRealRatioPoisson = 0.386;
inline constexpr double kMeanRealRatioCoe = 0.536;

// First moment of the GinUE nearest-neighbour spacing density. The library
// recomputes it by quadrature; this value is the pinned reference.
inline constexpr double kGinueMeanSpacing = 1.1429;

// Below this sample count the normalized metrics R_c / Theta_c are too noisy
// to report; raw averages are still produced.
inline constexpr int kMinSamplesForNormalized = 50;

// Default modulus threshold below which numerical eigenvalues are treated as
// machine noise and filtered out.
inline constexpr double kPrecisionEpsilon = 1e-16;

// Dissipation strengths above this value leave the regime in which the
// filtered complex spectrum is numerically trustworthy.
inline constexpr double kGammaPrecisionThreshold = 0.4;

// Dense Liouville-space work above this spin is refused without an explicit
// override (matrix side (2j+1)^2 grows too large for desk-scale memory).
inline constexpr double kMaxDeskScaleSpin = 40.0;

inline constexpr const char* kConstantsVersion = "1";
inline constexpr const char* kCodeVersion = "0.1.0";

}  // namespace ktop::constants
