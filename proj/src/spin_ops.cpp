#include "ktop/spin_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace ktop::spin {

SpinJ::SpinJ(double j) {
  const double two_j = 2.0 * j;
  const double rounded = std::round(two_j);
  if (!(j >= 0.0) || std::abs(two_j - rounded) > 1e-9) {
    throw std::invalid_argument("spin j must be a non-negative half-integer");
  }
  two_j_ = static_cast<int>(rounded);
}

SpinJ SpinJ::from_two_j(int two_j) {
  if (two_j < 0) {
    throw std::invalid_argument("2j must be non-negative");
  }
  SpinJ s;
  s.two_j_ = two_j;
  return s;
}

CMatrix jz(SpinJ j) {
  const int d = j.dimension();
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = Complex(i - j.value(), 0.0);
  }
  return m;
}

CMatrix jplus(SpinJ j) {
  const int d = j.dimension();
  const double jj = j.value() * (j.value() + 1.0);
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) {
    const double mz = i - j.value();
    m(i + 1, i) = Complex(std::sqrt(jj - mz * (mz + 1.0)), 0.0);
  }
  return m;
}

CMatrix jminus(SpinJ j) { return jplus(j).adjoint(); }

CMatrix jx(SpinJ j) {
  const CMatrix p = jplus(j);
  return 0.5 * (p + p.adjoint());
}

CMatrix jy(SpinJ j) {
  const CMatrix p = jplus(j);
  return Complex(0.0, -0.5) * (p - p.adjoint());
}

CMatrix parity_op(SpinJ j) {
  const int d = j.dimension();
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = Complex(i % 2 == 0 ? 1.0 : -1.0, 0.0);
  }
  return m;
}

}  // namespace ktop::spin
