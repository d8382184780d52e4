#include "ktop/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "ktop/csv.hpp"

namespace ktop::liouville {

namespace {

constexpr double kOffBlockTol = 1e-12;

// Index of |m_r><m_c| under column stacking: basis vector c*d + r.
inline Eigen::Index liouville_index(int d, int r, int c) {
  return static_cast<Eigen::Index>(c) * d + r;
}

// Indices of the ladder subspace with fixed m - m' = q. The dissipative
// segment generator is exactly block-diagonal over these subspaces: the
// precession part is diagonal and the jump term lowers m and m' together.
std::vector<Eigen::Index> ladder_block(int d, int q) {
  std::vector<Eigen::Index> idx;
  idx.reserve(d - std::abs(q));
  for (int t = 0; t < d - std::abs(q); ++t) {
    const int r = t + std::max(q, 0);
    const int c = t + std::max(-q, 0);
    idx.push_back(liouville_index(d, r, c));
  }
  return idx;
}

// exp of a matrix that is block-diagonal over the ladder subspaces; each
// block is exponentiated densely. Entries outside the blocks must be exact
// zeros and are verified before use.
CMatrix ladder_block_exp(const CMatrix& g, int d) {
  const Eigen::Index n = g.rows();
  std::vector<int> block_of(n);
  for (int q = -(d - 1); q <= d - 1; ++q) {
    for (Eigen::Index i : ladder_block(d, q)) {
      block_of[i] = q;
    }
  }
  double off = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (block_of[r] != block_of[c]) {
        off = std::max(off, std::abs(g(r, c)));
      }
    }
  }
  if (off > kOffBlockTol * (1.0 + g.norm())) {
    throw std::logic_error("generator is not ladder-block-diagonal");
  }
  CMatrix out = CMatrix::Zero(n, n);
  for (int q = -(d - 1); q <= d - 1; ++q) {
    const auto idx = ladder_block(d, q);
    const CMatrix block = g(idx, idx);
    const CMatrix block_exp = block.exp();
    out(idx, idx) = block_exp;
  }
  return out;
}

// e^{-iH} for a Hermitian H that only couples basis indices of equal parity
// (Jz, Jz^2, Jy^2 all do). Diagonalizing the even and odd sub-blocks
// separately keeps the parity zero pattern of the result exact, which in
// turn makes the parity split of the Floquet operators exact.
CMatrix evolve_parity_even(const CMatrix& h) {
  const int d = static_cast<int>(h.rows());
  std::vector<Eigen::Index> even, odd;
  for (int i = 0; i < d; ++i) {
    (i % 2 == 0 ? even : odd).push_back(i);
  }
  for (Eigen::Index r : even) {
    for (Eigen::Index c : odd) {
      if (h(r, c) != Complex(0, 0) || h(c, r) != Complex(0, 0)) {
        throw std::logic_error("hamiltonian couples parity sectors");
      }
    }
  }
  CMatrix u = CMatrix::Zero(d, d);
  for (const auto& idx : {even, odd}) {
    if (idx.empty()) continue;
    CMatrix sub = h(idx, idx);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("hermitian eigensolver failed");
    }
    CVector phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
      phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k)));
    }
    CMatrix sub_u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    u(idx, idx) = sub_u;
  }
  return u;
}

// Conjugation superoperator rho -> u rho u^dag, i.e. conj(u) kron u.
CMatrix conjugation_superop(const CMatrix& u) {
  return Eigen::kroneckerProduct(u.conjugate(), u).eval();
}

}  // namespace

void ModelParams::validate() const {
  if (gamma < 0.0) {
    throw std::invalid_argument("gamma must be non-negative");
  }
}

CVector vectorize(const CMatrix& rho) {
  if (rho.rows() != rho.cols()) {
    throw std::invalid_argument("vectorize: matrix must be square");
  }
  return Eigen::Map<const CVector>(rho.data(), rho.size());
}

CMatrix devectorize(const CVector& v) {
  const auto n = v.size();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) {
    throw std::invalid_argument("devectorize: length is not a perfect square");
  }
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

CMatrix commutator_superop(const CMatrix& h) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("commutator_superop: matrix must be square");
  }
  const auto d = h.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  return Eigen::kroneckerProduct(id, h).eval() -
         Eigen::kroneckerProduct(h.transpose(), id).eval();
}

CMatrix dissipator_superop(spin::SpinJ j, double gamma) {
  if (gamma < 0.0) {
    throw std::invalid_argument("dissipator_superop: gamma must be non-negative");
  }
  const int d = j.dimension();
  const CMatrix jp = spin::jplus(j);
  const CMatrix jm = spin::jminus(j);
  const CMatrix jpjm = jp * jm;
  const CMatrix id = CMatrix::Identity(d, d);
  const double scale = j.two_j() > 0 ? gamma / j.two_j() : gamma;
  return scale * (2.0 * Eigen::kroneckerProduct(jp.transpose(), jm).eval() -
                  Eigen::kroneckerProduct(id, jpjm).eval() -
                  Eigen::kroneckerProduct(jpjm.transpose(), id).eval());
}

CMatrix matrix_exponential(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument("matrix_exponential: non-finite entries");
  }
  return m.exp();
}

CMatrix precession_hamiltonian(spin::SpinJ j, double p, double k0) {
  const int d = j.dimension();
  CMatrix h = CMatrix::Zero(d, d);
  const double two_j = std::max(j.two_j(), 1);
  for (int i = 0; i < d; ++i) {
    const double m = i - j.value();
    h(i, i) = Complex(p * m + (k0 / two_j) * m * m, 0.0);
  }
  return h;
}

CMatrix kick_hamiltonian(spin::SpinJ j, double k1) {
  const double two_j = std::max(j.two_j(), 1);
  const CMatrix y = spin::jy(j);
  return (k1 / two_j) * (y * y);
}

CMatrix dissipative_floquet(const ModelParams& params) {
  params.validate();
  const int d = params.j.dimension();
  const CMatrix h0 = precession_hamiltonian(params.j, params.p, params.k0);
  const CMatrix generator =
      dissipator_superop(params.j, params.gamma) - Complex(0, 1) * commutator_superop(h0);
  const CMatrix segment = ladder_block_exp(generator, d);
  const CMatrix u1 = evolve_parity_even(kick_hamiltonian(params.j, params.k1));
  return conjugation_superop(u1) * segment;
}

CMatrix decoupled_floquet(const ModelParams& params) {
  params.validate();
  const int d = params.j.dimension();
  const CMatrix damp = ladder_block_exp(dissipator_superop(params.j, params.gamma), d);
  const CMatrix f = isolated_floquet(params.j, params.p, params.k0, params.k1);
  return damp * conjugation_superop(f);
}

CMatrix isolated_floquet(spin::SpinJ j, double p, double k0, double k1) {
  const int d = j.dimension();
  const CMatrix h0 = precession_hamiltonian(j, p, k0);
  CMatrix u0 = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    u0(i, i) = std::exp(Complex(0.0, -h0(i, i).real()));
  }
  const CMatrix u1 = evolve_parity_even(kick_hamiltonian(j, k1));
  return u1 * u0;
}

const char* sector_name(Sector s) {
  switch (s) {
    case Sector::Positive: return "positive";
    case Sector::Negative: return "negative";
    case Sector::Full: return "full";
  }
  return "full";
}

Sector sector_from_name(const std::string& name) {
  if (name == "positive") return Sector::Positive;
  if (name == "negative") return Sector::Negative;
  if (name == "full") return Sector::Full;
  throw std::invalid_argument("unknown sector: " + name);
}

int positive_sector_dimension(spin::SpinJ j) {
  const int d = j.dimension();
  const int even = (d + 1) / 2;
  const int odd = d / 2;
  return even * even + odd * odd;
}

int negative_sector_dimension(spin::SpinJ j) {
  const int d = j.dimension();
  return d * d - positive_sector_dimension(j);
}

std::vector<Eigen::Index> parity_permutation(int hilbert_dim, int* n_positive) {
  std::vector<Eigen::Index> perm;
  perm.reserve(static_cast<std::size_t>(hilbert_dim) * hilbert_dim);
  for (int pass = 0; pass < 2; ++pass) {
    for (int c = 0; c < hilbert_dim; ++c) {
      for (int r = 0; r < hilbert_dim; ++r) {
        if ((r + c) % 2 == pass) {
          perm.push_back(liouville_index(hilbert_dim, r, c));
        }
      }
    }
    if (pass == 0 && n_positive != nullptr) {
      *n_positive = static_cast<int>(perm.size());
    }
  }
  return perm;
}

std::pair<CMatrix, CMatrix> parity_sectors(const CMatrix& superop, spin::SpinJ j) {
  const int d = j.dimension();
  if (superop.rows() != static_cast<Eigen::Index>(d) * d || superop.rows() != superop.cols()) {
    throw std::invalid_argument("parity_sectors: superoperator size does not match j");
  }
  int n_pos = 0;
  const auto perm = parity_permutation(d, &n_pos);
  const std::vector<Eigen::Index> pos(perm.begin(), perm.begin() + n_pos);
  const std::vector<Eigen::Index> neg(perm.begin() + n_pos, perm.end());
  const double off = std::max(neg.empty() ? 0.0 : CMatrix(superop(pos, neg)).cwiseAbs().maxCoeff(),
                              neg.empty() ? 0.0 : CMatrix(superop(neg, pos)).cwiseAbs().maxCoeff());
  if (off > kOffBlockTol) {
    throw std::runtime_error("parity_sectors: off-block norm above tolerance");
  }
  return {superop(pos, pos), neg.empty() ? CMatrix(0, 0) : CMatrix(superop(neg, neg))};
}

std::pair<CMatrix, CMatrix> hilbert_parity_blocks(const CMatrix& op) {
  const auto d = op.rows();
  if (d != op.cols()) {
    throw std::invalid_argument("hilbert_parity_blocks: matrix must be square");
  }
  std::vector<Eigen::Index> even, odd;
  for (Eigen::Index i = 0; i < d; ++i) {
    (i % 2 == 0 ? even : odd).push_back(i);
  }
  const double off = std::max(odd.empty() ? 0.0 : CMatrix(op(even, odd)).cwiseAbs().maxCoeff(),
                              odd.empty() ? 0.0 : CMatrix(op(odd, even)).cwiseAbs().maxCoeff());
  if (off > kOffBlockTol) {
    throw std::runtime_error("hilbert_parity_blocks: operator does not commute with parity");
  }
  return {op(even, even), odd.empty() ? CMatrix(0, 0) : CMatrix(op(odd, odd))};
}

ComplexSpectrum spectrum(const CMatrix& superop, Sector sector) {
  if (!superop.allFinite()) {
    throw std::invalid_argument("spectrum: non-finite entries");
  }
  CMatrix block;
  if (sector == Sector::Full) {
    block = superop;
  } else {
    const auto d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(superop.rows()))));
    auto [pos, neg] = parity_sectors(superop, spin::SpinJ::from_two_j(d - 1));
    block = sector == Sector::Positive ? std::move(pos) : std::move(neg);
  }
  Eigen::ComplexEigenSolver<CMatrix> es;
  es.compute(block, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectrum: eigensolver did not converge");
  }
  ComplexSpectrum spec;
  spec.sector = sector;
  spec.eigenvalues = es.eigenvalues();
  spec.eigenphases.resize(spec.eigenvalues.size());
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    const Complex lambda = spec.eigenvalues(k);
    spec.eigenphases(k) = std::log(lambda);
    if (lambda.real() < 0.0 && std::abs(lambda.imag()) < 1e-8) {
      ++spec.n_near_branch_cut;
    }
  }
  return spec;
}

std::pair<ComplexSpectrum, double> precision_filter(const ComplexSpectrum& spec, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("precision_filter: epsilon must be positive");
  }
  const Eigen::Index n = spec.eigenvalues.size();
  std::vector<Eigen::Index> keep;
  keep.reserve(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(spec.eigenvalues(k)) >= epsilon) {
      keep.push_back(k);
    }
  }
  ComplexSpectrum out;
  out.sector = spec.sector;
  out.n_near_branch_cut = spec.n_near_branch_cut;
  out.n_filtered = static_cast<int>(n - static_cast<Eigen::Index>(keep.size()));
  out.eigenvalues.resize(keep.size());
  out.eigenphases.resize(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.eigenvalues(i) = spec.eigenvalues(keep[i]);
    out.eigenphases(i) = spec.eigenphases(keep[i]);
  }
  const double fraction = n > 0 ? static_cast<double>(out.n_filtered) / n : 0.0;
  return {std::move(out), fraction};
}

RVector unitary_eigenphases(const CMatrix& u) {
  Eigen::ComplexEigenSolver<CMatrix> es;
  es.compute(u, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("unitary_eigenphases: eigensolver did not converge");
  }
  RVector phases(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::arg(es.eigenvalues()(k));
  }
  std::sort(phases.begin(), phases.end());
  return phases;
}

void write_spectrum_csv(const std::string& path, const ComplexSpectrum& spec,
                        const std::vector<std::pair<std::string, std::string>>& metadata) {
  csv::Writer w(path);
  for (const auto& [key, value] : metadata) {
    w.comment(key + "=" + value);
  }
  w.header({"re_lambda", "im_lambda", "re_phi", "im_phi", "sector"});
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    w.row({csv::format(spec.eigenvalues(k).real()), csv::format(spec.eigenvalues(k).imag()),
           csv::format(spec.eigenphases(k).real()), csv::format(spec.eigenphases(k).imag()),
           sector_name(spec.sector)});
  }
}

}  // namespace ktop::liouville
