#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ktop/constants.hpp"
#include "ktop/liouville.hpp"
#include "ktop/spin_ops.hpp"
#include "testutil.hpp"

using namespace ktop;
using namespace ktop::liouville;
using spin::SpinJ;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CMatrix basis_matrix(int d, int r, int c) {
  CMatrix m = CMatrix::Zero(d, d);
  m(r, c) = Complex(1, 0);
  return m;
}

ModelParams params(double p, double k0, double k1, double gamma, double jv) {
  return ModelParams{p, k0, k1, gamma, SpinJ(jv)};
}

}  // namespace

TEST_CASE("vectorization round trip and trace probe") {
  const CMatrix rho = test::random_hermitian(7, 21);
  CHECK(max_abs(devectorize(vectorize(rho)) - rho) == 0.0);

  const CVector probe = vectorize(CMatrix::Identity(7, 7));
  const Complex tr = probe.adjoint() * vectorize(rho);
  CHECK(std::abs(tr - rho.trace()) < 1e-13);

  CHECK_THROWS_AS(devectorize(CVector::Zero(7)), std::invalid_argument);
}

TEST_CASE("commutator superoperator on weight basis matrices") {
  const SpinJ j(2);
  const int d = j.dimension();
  const CMatrix jz = spin::jz(j);
  const CMatrix super = commutator_superop(jz);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      const CVector v = vectorize(basis_matrix(d, r, c));
      const CVector expect = Complex(r - c, 0) * v;  // m - m' = r - c
      CHECK((super * v - expect).norm() < 1e-12);
    }
  }
  CHECK(max_abs(commutator_superop(CMatrix::Identity(d, d))) == 0.0);
}

TEST_CASE("commutator spectrum equals the difference set of the spectrum") {
  const CMatrix h = test::random_hermitian(6, 5);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  std::vector<Complex> expected;
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      expected.emplace_back(es.eigenvalues()(a) - es.eigenvalues()(b), 0.0);
    }
  }
  Eigen::ComplexEigenSolver<CMatrix> ses(commutator_superop(h), false);
  CHECK(test::multiset_distance(test::to_vector(ses.eigenvalues()), expected) < 1e-9);
}

TEST_CASE("dissipator basics") {
  const SpinJ j(3);
  CHECK(max_abs(dissipator_superop(j, 0.0)) == 0.0);

  const CMatrix lind = dissipator_superop(j, 0.37);
  const CVector left = vectorize(CMatrix::Identity(j.dimension(), j.dimension()));
  CHECK((left.adjoint() * lind).norm() < 1e-12);

  // Lowest-weight state is dark: J- annihilates |j,-j>.
  const CVector ground = vectorize(basis_matrix(j.dimension(), 0, 0));
  CHECK((lind * ground).norm() < 1e-13);

  // Hermiticity preservation of the generator.
  const CMatrix h0 = precession_hamiltonian(j, 1.3, 7.0);
  const CMatrix gen = lind - Complex(0, 1) * commutator_superop(h0);
  const CMatrix rho = test::random_hermitian(j.dimension(), 99);
  const CMatrix out = devectorize(gen * vectorize(rho));
  CHECK(max_abs(out - out.adjoint()) < 1e-12);

  CHECK_THROWS_AS(dissipator_superop(j, -0.1), std::invalid_argument);
}

TEST_CASE("matrix exponential") {
  CHECK(max_abs(matrix_exponential(CMatrix::Zero(5, 5)) - CMatrix::Identity(5, 5)) == 0.0);

  CMatrix diag = CMatrix::Zero(4, 4);
  auto gen = test::rng(3);
  for (int i = 0; i < 4; ++i) diag(i, i) = Complex(test::gauss(gen), test::gauss(gen));
  const CMatrix ed = matrix_exponential(diag);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(ed(i, i) - std::exp(diag(i, i))) < 1e-13);
  }

  // Independent spectral route on a generic (diagonalizable) matrix.
  const CMatrix m = test::random_complex_matrix(50, 17) * 0.3;
  Eigen::ComplexEigenSolver<CMatrix> es(m, true);
  CVector phases(50);
  for (int i = 0; i < 50; ++i) phases(i) = std::exp(es.eigenvalues()(i));
  const CMatrix oracle =
      es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().inverse();
  CHECK(max_abs(matrix_exponential(m) - oracle) < 1e-9);

  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 0) = Complex(std::nan(""), 0);
  CHECK_THROWS_AS(matrix_exponential(bad), std::invalid_argument);
}

TEST_CASE("propagator construction agrees with the dense exponential route") {
  // The production path exponentiates the dissipative segment per ladder
  // block; the dense Pade route is the independent cross-check.
  const auto mp = params(2.0, 10.0, 8.0, 0.25, 3.0);
  const CMatrix h0 = precession_hamiltonian(mp.j, mp.p, mp.k0);
  const CMatrix gen = dissipator_superop(mp.j, mp.gamma) -
                      Complex(0, 1) * commutator_superop(h0);
  const CMatrix segment_dense = matrix_exponential(gen);

  const CMatrix d_fast = dissipative_floquet(mp);
  const auto mp_free = params(2.0, 10.0, 0.0, 0.25, 3.0);
  const CMatrix d_free = dissipative_floquet(mp_free);
  CHECK(max_abs(d_free - segment_dense) < 1e-12);  // k1 = 0: kick factor is the identity

  // With the kick on, conjugate the dense segment by the kick unitary built
  // from its own exponential route.
  const CMatrix h1 = kick_hamiltonian(mp.j, mp.k1);
  const CMatrix u1 = matrix_exponential(Complex(0, -1) * h1);
  const int dd = mp.j.dimension();
  CMatrix kick = CMatrix::Zero(dd * dd, dd * dd);
  for (int c2 = 0; c2 < dd; ++c2)
    for (int r2 = 0; r2 < dd; ++r2)
      for (int c1 = 0; c1 < dd; ++c1)
        for (int r1 = 0; r1 < dd; ++r1)
          kick(c1 * dd + r1, c2 * dd + r2) = std::conj(u1(c1, c2)) * u1(r1, r2);
  CHECK(max_abs(d_fast - kick * segment_dense) < 1e-12);
}

TEST_CASE("dissipative Floquet channel properties") {
  const auto mp = params(2.0, 10.0, 8.0, 0.1, 5.0);
  const CMatrix d = dissipative_floquet(mp);
  const int dim = mp.j.dimension();

  // Trace preservation: vec(I) is a left fixed point.
  const CVector left = vectorize(CMatrix::Identity(dim, dim));
  CHECK(((left.adjoint() * d).adjoint() - left).norm() < 1e-10);

  // Hermiticity preservation.
  const CMatrix rho = test::random_hermitian(dim, 4);
  const CMatrix out = devectorize(d * vectorize(rho));
  CHECK(max_abs(out - out.adjoint()) < 1e-12);

  // Unitary channel without dissipation.
  const CMatrix d0 = dissipative_floquet(params(2.0, 10.0, 8.0, 0.0, 5.0));
  Eigen::ComplexEigenSolver<CMatrix> es(d0, false);
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    CHECK(std::abs(std::abs(es.eigenvalues()(k)) - 1.0) < 1e-10);
  }
}

TEST_CASE("spectrum is conjugation symmetric") {
  const CMatrix d = dissipative_floquet(params(2.0, 10.0, 8.0, 0.2, 5.0));
  const auto spec = spectrum(d, Sector::Full);
  std::vector<Complex> conj;
  for (const Complex& lambda : test::to_vector(spec.eigenvalues)) {
    conj.push_back(std::conj(lambda));
  }
  CHECK(test::multiset_distance(test::to_vector(spec.eigenvalues), conj) < 1e-9);
}

TEST_CASE("gamma -> 0 continuity of the propagator") {
  const CMatrix d0 = dissipative_floquet(params(2.0, 10.0, 8.0, 0.0, 10.0));
  auto radius = [&](double gamma) {
    const CMatrix diff = dissipative_floquet(params(2.0, 10.0, 8.0, gamma, 10.0)) - d0;
    Eigen::ComplexEigenSolver<CMatrix> es(diff, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  };
  const double r_small = radius(1e-3);
  const double r_large = radius(1e-2);
  CHECK(r_large / r_small == doctest::Approx(10.0).epsilon(0.35));
}

TEST_CASE("decoupled propagator") {
  // Identical channels without dissipation.
  const CMatrix d0 = dissipative_floquet(params(2.0, 10.0, 8.0, 0.0, 4.0));
  const CMatrix dd0 = decoupled_floquet(params(2.0, 10.0, 8.0, 0.0, 4.0));
  CHECK(max_abs(d0 - dd0) < 1e-12);

  // Trace preservation.
  const auto mp = params(2.0, 10.0, 8.0, 0.3, 4.0);
  const CMatrix dt = decoupled_floquet(mp);
  const int dim = mp.j.dimension();
  const CVector left = vectorize(CMatrix::Identity(dim, dim));
  CHECK(((left.adjoint() * dt).adjoint() - left).norm() < 1e-10);

  // Splitting error is first order in gamma: the leading term is the
  // commutator of the dissipator (itself proportional to gamma) with the
  // gamma-independent precession generator.
  std::vector<double> lg, le;
  for (double gamma : {0.025, 0.05, 0.1}) {
    const CMatrix a = dissipative_floquet(params(2.0, 10.0, 8.0, gamma, 10.0));
    const CMatrix b = decoupled_floquet(params(2.0, 10.0, 8.0, gamma, 10.0));
    lg.push_back(std::log(gamma));
    le.push_back(std::log((a - b).norm() / a.norm()));
  }
  CHECK(test::fit_slope(lg, le) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("isolated Floquet operator") {
  const SpinJ j(6);
  const CMatrix f = isolated_floquet(j, 2.0, 10.0, 8.0);
  const CMatrix id = CMatrix::Identity(j.dimension(), j.dimension());
  CHECK(max_abs(f.adjoint() * f - id) < 1e-12);

  const CMatrix pi = spin::parity_op(j);
  CHECK(max_abs(f * pi - pi * f) < 1e-12);

  // Torsion-free case: eigenphases are -p*m modulo 2pi.
  const double p = 1.1;
  const CMatrix f0 = isolated_floquet(j, p, 0.0, 0.0);
  const RVector phases = unitary_eigenphases(f0);
  std::vector<double> expected;
  for (int i = 0; i < j.dimension(); ++i) {
    double phi = std::remainder(-p * (i - j.value()), 2.0 * M_PI);
    expected.push_back(phi);
  }
  std::sort(expected.begin(), expected.end());
  for (int i = 0; i < j.dimension(); ++i) {
    CHECK(phases(i) == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("parity sector split") {
  int n_pos = 0;
  const auto perm = parity_permutation(21, &n_pos);
  CHECK(perm.size() == 441);
  CHECK(n_pos == 221);
  CHECK(positive_sector_dimension(SpinJ(10)) == 221);
  CHECK(negative_sector_dimension(SpinJ(10)) == 220);
  // Counting formula at the largest published size, no matrix required.
  CHECK(positive_sector_dimension(SpinJ(80)) == 12961);

  const auto mp = params(2.0, 10.0, 8.0, 0.1, 10.0);
  const CMatrix d = dissipative_floquet(mp);
  const auto [pos, neg] = parity_sectors(d, mp.j);
  CHECK(pos.rows() == 221);
  CHECK(neg.rows() == 220);

  // Union of the block spectra reproduces the full spectrum.
  const auto mp_small = params(2.0, 10.0, 8.0, 0.1, 3.0);
  const CMatrix ds = dissipative_floquet(mp_small);
  const auto full = spectrum(ds, Sector::Full);
  const auto sp = spectrum(ds, Sector::Positive);
  const auto sn = spectrum(ds, Sector::Negative);
  std::vector<Complex> merged = test::to_vector(sp.eigenvalues);
  for (const Complex& v : test::to_vector(sn.eigenvalues)) merged.push_back(v);
  CHECK(test::multiset_distance(test::to_vector(full.eigenvalues), merged) < 1e-9);

  CHECK_THROWS_AS(parity_sectors(d, SpinJ(9)), std::invalid_argument);
  CHECK_THROWS_AS(parity_sectors(test::random_complex_matrix(9, 2), SpinJ(1)),
                  std::runtime_error);
}

TEST_CASE("spectrum of the unitary channel sits on the unit circle") {
  const CMatrix d = dissipative_floquet(params(2.0, 10.0, 8.0, 0.0, 5.0));
  const auto spec = spectrum(d, Sector::Positive);
  int n_at_one = 0;
  for (int k = 0; k < spec.eigenphases.size(); ++k) {
    CHECK(std::abs(spec.eigenphases(k).real()) < 1e-10);
    if (std::abs(spec.eigenvalues(k) - Complex(1, 0)) < 1e-10) ++n_at_one;
  }
  CHECK(n_at_one >= 1);
}

TEST_CASE("dissipative spectrum: contraction and steady state") {
  const CMatrix d = dissipative_floquet(params(2.0, 10.0, 8.0, 0.1, 10.0));
  const auto spec = spectrum(d, Sector::Positive);
  CHECK(spec.eigenvalues.cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
  int n_at_one = 0;
  int n_zero_phase = 0;
  for (int k = 0; k < spec.eigenvalues.size(); ++k) {
    if (std::abs(spec.eigenvalues(k) - Complex(1, 0)) < 1e-10) ++n_at_one;
    if (std::abs(spec.eigenphases(k)) < 1e-10) ++n_zero_phase;
  }
  CHECK(n_at_one == 1);
  CHECK(n_zero_phase == 1);

  // The steady state lives in the positive sector only.
  const auto neg = spectrum(d, Sector::Negative);
  for (int k = 0; k < neg.eigenvalues.size(); ++k) {
    CHECK(std::abs(neg.eigenvalues(k) - Complex(1, 0)) > 1e-6);
  }
}

TEST_CASE("precision filter") {
  const CMatrix unit = dissipative_floquet(params(2.0, 10.0, 8.0, 0.0, 5.0));
  const auto spec0 = spectrum(unit, Sector::Positive);
  const auto [kept0, frac0] = precision_filter(spec0);
  CHECK(frac0 == 0.0);
  CHECK(kept0.eigenvalues.size() == spec0.eigenvalues.size());

  // Strong dissipation collapses much of the spectrum below machine
  // precision. At j=10 the deepest decay rate is about (gamma/2j)*4j(j+1),
  // so moduli cross 1e-16 only once gamma exceeds ~3.
  const CMatrix heavy = dissipative_floquet(params(2.0, 10.0, 8.0, 6.0, 10.0));
  const auto spec1 = spectrum(heavy, Sector::Positive);
  const auto [kept1, frac1] = precision_filter(spec1, 1e-16);
  CHECK(frac1 > 0.2);
  CHECK(kept1.n_filtered > 0);

  CHECK_THROWS_AS(precision_filter(spec1, 0.0), std::invalid_argument);
}

TEST_CASE("spectrum CSV export") {
  const CMatrix d = dissipative_floquet(params(2.0, 10.0, 8.0, 0.1, 2.0));
  const auto spec = spectrum(d, Sector::Positive);
  const std::string path = "test_spectrum_out.csv";
  write_spectrum_csv(path, spec, {{"j", "2"}});
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int comments = 0, rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      ++comments;
    } else if (!header) {
      CHECK(line == "re_lambda,im_lambda,re_phi,im_phi,sector");
      header = true;
    } else {
      ++rows;
      CHECK(line.find("positive") != std::string::npos);
    }
  }
  CHECK(comments == 1);
  CHECK(rows == spec.eigenvalues.size());
  std::filesystem::remove(path);
}
