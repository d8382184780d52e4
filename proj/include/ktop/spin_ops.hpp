#pragma once

#include "ktop/types.hpp"

namespace ktop::spin {

// Spin magnitude j, with 2j a non-negative integer. Hilbert dimension 2j+1.
class SpinJ {
 public:
  SpinJ() : two_j_(0) {}
  explicit SpinJ(double j);
  static SpinJ from_two_j(int two_j);

  double value() const { return 0.5 * two_j_; }
  int two_j() const { return two_j_; }
  int dimension() const { return two_j_ + 1; }

  friend bool operator==(SpinJ a, SpinJ b) { return a.two_j_ == b.two_j_; }

 private:
  int two_j_;
};

// Basis convention, fixed here for the whole project: |j,m> ordered by
// ascending m, so index i = 0..2j carries m = i - j. Parity sectors and
// Liouville-space vectorization both assume this ordering.
CMatrix jz(SpinJ j);
CMatrix jplus(SpinJ j);
CMatrix jminus(SpinJ j);
CMatrix jx(SpinJ j);
CMatrix jy(SpinJ j);

// Diagonal parity operator, entries (-1)^(m+j) in {+1,-1}.
CMatrix parity_op(SpinJ j);

}  // namespace ktop::spin
