#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ktop/spin_ops.hpp"
#include "ktop/types.hpp"

namespace ktop::liouville {

struct ModelParams {
  double p = 0.0;      // linear precession strength
  double k0 = 0.0;     // torsion strength
  double k1 = 0.0;     // kick strength
  double gamma = 0.0;  // collective dissipation strength, >= 0
  spin::SpinJ j;

  void validate() const;
};

// Vectorization convention, fixed project-wide: vec(rho) stacks the columns
// of rho (Eigen's native storage order), so vec(A rho B) = (B^T kron A) vec(rho)
// and the commutator lifts to (I kron H) - (H^T kron I).
CVector vectorize(const CMatrix& rho);
CMatrix devectorize(const CVector& v);

// Superoperator for rho -> [h, rho].
CMatrix commutator_superop(const CMatrix& h);

// Superoperator for rho -> (gamma/2j) (2 J- rho J+ - {J+J-, rho}).
CMatrix dissipator_superop(spin::SpinJ j, double gamma);

// Dense exp(m) by scaling-and-squaring with a Pade approximant.
CMatrix matrix_exponential(const CMatrix& m);

// Hamiltonian pieces: h0 = p Jz + (k0/2j) Jz^2 (diagonal), h1 = (k1/2j) Jy^2.
CMatrix precession_hamiltonian(spin::SpinJ j, double p, double k0);
CMatrix kick_hamiltonian(spin::SpinJ j, double k1);

// One-period propagator of the damped kicked top acting on vectorized
// density matrices: the dissipative segment exp(dissipator - i ad_{h0})
// followed by the kick conjugation rho -> e^{-i h1} rho e^{+i h1}. The kick
// factor is built from the Hilbert-space unitary, never by exponentiating
// the commutator superoperator.
CMatrix dissipative_floquet(const ModelParams& params);

// Split variant: exp(dissipator) applied after the full unitary conjugation
// rho -> F rho F^dag. Agrees with dissipative_floquet to O(gamma^2).
CMatrix decoupled_floquet(const ModelParams& params);

// Unitary Floquet operator F = e^{-i h1} e^{-i h0} on the Hilbert space.
CMatrix isolated_floquet(spin::SpinJ j, double p, double k0, double k1);

enum class Sector { Positive, Negative, Full };

const char* sector_name(Sector s);
Sector sector_from_name(const std::string& name);

// Parity of the Liouville basis element |m><m'| is (-1)^(m-m'); the counting
// below needs only the Hilbert dimension.
int positive_sector_dimension(spin::SpinJ j);
int negative_sector_dimension(spin::SpinJ j);

// Permutation of Liouville basis indices placing the positive-parity
// elements first; n_positive receives the split point.
std::vector<Eigen::Index> parity_permutation(int hilbert_dim, int* n_positive);

// Blocks of a superoperator in the parity-ordered basis. Throws if the
// off-block norm exceeds 1e-12 (a construction bug, not a data property).
std::pair<CMatrix, CMatrix> parity_sectors(const CMatrix& superop, spin::SpinJ j);

// Hilbert-space analogue for operators commuting with the parity operator,
// e.g. the isolated Floquet operator. Returns (even, odd) index blocks.
std::pair<CMatrix, CMatrix> hilbert_parity_blocks(const CMatrix& op);

struct ComplexSpectrum {
  CVector eigenvalues;
  CVector eigenphases;  // principal log: Re = ln|lambda|, Im = Arg in (-pi, pi]
  Sector sector = Sector::Full;
  int n_filtered = 0;
  // Diagnostic: eigenvalues within 1e-8 of the negative real axis, where the
  // log branch cut can split close neighbours.
  int n_near_branch_cut = 0;
};

// Complex spectrum of a superoperator, optionally restricted to one parity
// sector. Eigenvectors are not retained.
ComplexSpectrum spectrum(const CMatrix& superop, Sector sector);

// Removes eigenvalues with |lambda| < epsilon; returns the kept spectrum and
// the removed fraction N_eps / N.
std::pair<ComplexSpectrum, double> precision_filter(const ComplexSpectrum& spec,
                                                    double epsilon = 1e-16);

// Sorted eigenphase angles Arg(lambda) of a unitary matrix.
RVector unitary_eigenphases(const CMatrix& u);

// CSV export: one row (re_lambda, im_lambda, re_phi, im_phi, sector) per
// retained eigenvalue, 17 significant digits. The metadata lines are written
// as leading '#' comments.
void write_spectrum_csv(const std::string& path, const ComplexSpectrum& spec,
                        const std::vector<std::pair<std::string, std::string>>& metadata);

}  // namespace ktop::liouville
