// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace hierprec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// (A + A^H) / 2
CMatrix hermitian_part(const CMatrix& a);

// Block-diagonal concatenation; blocks may be rectangular.
CMatrix block_diag(std::span<const CMatrix> blocks);

// ln det(A) for Hermitian positive definite A, via Cholesky. Throws NumericalError otherwise.
double log_det_hpd(const CMatrix& a);

// A^{-1} for Hermitian positive definite A, Hermitian-symmetrized.
CMatrix inverse_hpd(const CMatrix& a);

// Solves A X = B for Hermitian positive semidefinite A. Uses Cholesky when A is
// numerically definite and the minimum-norm least-squares solution otherwise.
CMatrix solve_hpsd(const CMatrix& a, const CMatrix& b);

// Squared norm of each row.
RVector row_norms2(const CMatrix& m);

bool all_finite(const CMatrix& m);

}  // namespace hierprec
