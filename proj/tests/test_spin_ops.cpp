#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ktop/liouville.hpp"
#include "ktop/spin_ops.hpp"
#include "testutil.hpp"

using namespace ktop;
using spin::SpinJ;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("SpinJ validates half-integers") {
  CHECK(SpinJ(0.5).two_j() == 1);
  CHECK(SpinJ(10).dimension() == 21);
  CHECK(SpinJ(0.5).dimension() == 2);
  CHECK_THROWS_AS(SpinJ(0.3), std::invalid_argument);
  CHECK_THROWS_AS(SpinJ(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(SpinJ::from_two_j(-2), std::invalid_argument);
}

TEST_CASE("jz is diagonal with ascending weights") {
  const CMatrix half = spin::jz(SpinJ(0.5));
  CHECK(half(0, 0) == Complex(-0.5, 0));
  CHECK(half(1, 1) == Complex(0.5, 0));

  const CMatrix one = spin::jz(SpinJ(1));
  CHECK(one(0, 0) == Complex(-1, 0));
  CHECK(one(1, 1) == Complex(0, 0));
  CHECK(one(2, 2) == Complex(1, 0));

  const CMatrix big = spin::jz(SpinJ(10));
  CHECK(big.rows() == 21);
  CHECK(std::abs(big.trace()) == 0.0);
  CHECK(max_abs(big - big.adjoint()) == 0.0);
}

TEST_CASE("ladder operators") {
  const CMatrix p_half = spin::jplus(SpinJ(0.5));
  CHECK(p_half(1, 0) == Complex(1, 0));
  CHECK(p_half.cwiseAbs().sum() == doctest::Approx(1.0));

  const CMatrix p_one = spin::jplus(SpinJ(1));
  CHECK(p_one(1, 0).real() == doctest::Approx(std::sqrt(2.0)));
  CHECK(p_one(2, 1).real() == doctest::Approx(std::sqrt(2.0)));

  // Highest weight annihilated: the last column of J+ vanishes.
  for (double jv : {0.5, 1.0, 3.5, 12.0}) {
    const CMatrix p = spin::jplus(SpinJ(jv));
    CHECK(p.col(p.cols() - 1).norm() == 0.0);
  }

  // J- is the exact adjoint by construction.
  const CMatrix m = spin::jminus(SpinJ(2.5));
  CHECK(max_abs(m - spin::jplus(SpinJ(2.5)).adjoint()) == 0.0);
}

TEST_CASE("su(2) algebra and Casimir") {
  for (double jv : {0.5, 1.0, 1.5, 5.0, 40.0}) {
    const SpinJ j(jv);
    const CMatrix x = spin::jx(j), y = spin::jy(j), z = spin::jz(j);
    const Complex i(0, 1);
    CHECK(max_abs(x * y - y * x - i * z) < 1e-12);
    CHECK(max_abs(y * z - z * y - i * x) < 1e-12);
    CHECK(max_abs(z * x - x * z - i * y) < 1e-12);
    const CMatrix casimir = x * x + y * y + z * z;
    const CMatrix expected = jv * (jv + 1.0) * CMatrix::Identity(j.dimension(), j.dimension());
    CHECK(max_abs(casimir - expected) < 1e-12);
    CHECK(max_abs(x - x.adjoint()) < 1e-15);
    CHECK(max_abs(y - y.adjoint()) < 1e-15);
  }
}

TEST_CASE("spin-1/2 reduces to Pauli matrices") {
  const CMatrix x = spin::jx(SpinJ(0.5));
  CHECK(x(0, 1) == Complex(0.5, 0));
  CHECK(x(1, 0) == Complex(0.5, 0));
  // Ascending-m ordering puts |-1/2> first, so sigma_y appears with its
  // rows and columns swapped relative to the textbook (+,-) layout.
  const CMatrix y = spin::jy(SpinJ(0.5));
  CHECK(y(0, 1) == Complex(0, 0.5));
  CHECK(y(1, 0) == Complex(0, -0.5));
}

TEST_CASE("parity operator") {
  const CMatrix pi1 = spin::parity_op(SpinJ(1));
  CHECK(pi1(0, 0) == Complex(1, 0));
  CHECK(pi1(1, 1) == Complex(-1, 0));
  CHECK(pi1(2, 2) == Complex(1, 0));

  for (double jv : {0.5, 1.0, 7.5, 10.0}) {
    const SpinJ j(jv);
    const CMatrix pi = spin::parity_op(j);
    const CMatrix id = CMatrix::Identity(j.dimension(), j.dimension());
    CHECK(max_abs(pi * pi - id) == 0.0);
    CHECK(max_abs(pi - pi.adjoint()) == 0.0);
  }
}

TEST_CASE("parity commutes with the kicked Hamiltonian at the kick instant") {
  auto gen = test::rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const SpinJ j(4);
    const double p = 4.0 * test::uniform(gen) - 2.0;
    const double k0 = 20.0 * test::uniform(gen);
    const double k1 = 10.0 * test::uniform(gen);
    const CMatrix h = liouville::precession_hamiltonian(j, p, k0) +
                      liouville::kick_hamiltonian(j, k1);
    const CMatrix pi = spin::parity_op(j);
    CHECK(max_abs(pi * h * pi.adjoint() - h) < 1e-12);
  }
}
