// SPDX-License-Identifier: Apache-2.0

#include "hierprec/linalg.hpp"

#include <cmath>

#include "hierprec/errors.hpp"

namespace hierprec {

CMatrix hermitian_part(const CMatrix& a) {
  CMatrix h = 0.5 * (a + a.adjoint());
  return h;
}

CMatrix block_diag(std::span<const CMatrix> blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  CMatrix out = CMatrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

double log_det_hpd(const CMatrix& a) {
  if (a.rows() != a.cols()) throw NumericalError("log_det_hpd: matrix is not square");
  Eigen::LLT<CMatrix> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) throw NumericalError("log_det_hpd: matrix is not positive definite");
  const CMatrix& factor = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < factor.rows(); ++i) acc += std::log(factor(i, i).real());
  return 2.0 * acc;
}

CMatrix inverse_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) throw NumericalError("inverse_hpd: matrix is not positive definite");
  CMatrix inv = llt.solve(CMatrix::Identity(a.rows(), a.cols()));
  return hermitian_part(inv);
}

CMatrix solve_hpsd(const CMatrix& a, const CMatrix& b) {
  const CMatrix h = hermitian_part(a);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const RVector& ev = eig.eigenvalues();
  const double scale = ev.size() > 0 ? std::max(std::abs(ev(ev.size() - 1)), 1.0) : 1.0;
  const double cutoff = scale * 1e-12 * static_cast<double>(std::max<Eigen::Index>(h.rows(), 1));
  if (ev.size() > 0 && ev(0) > cutoff) {
    Eigen::LLT<CMatrix> llt(h);
    if (llt.info() == Eigen::Success) return llt.solve(b);
  }
  // Pseudo-inverse restricted to the numerically nonzero spectrum.
  const CMatrix& u = eig.eigenvectors();
  CMatrix proj = u.adjoint() * b;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff) {
      proj.row(i) /= ev(i);
    } else {
      proj.row(i).setZero();
    }
  }
  return u * proj;
}

RVector row_norms2(const CMatrix& m) { return m.rowwise().squaredNorm(); }

bool all_finite(const CMatrix& m) { return m.allFinite(); }

}  // namespace hierprec
