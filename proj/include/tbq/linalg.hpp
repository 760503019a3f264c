#pragma once

#include <Eigen/Dense>

#include "tbq/common.hpp"

namespace tbq {

/// Relative threshold below which Hermitian eigenvalues are treated as zero.
inline constexpr double kEigClampTol = 1e-14;

struct HermEig {
  Eigen::VectorXd values;    // ascending, clamped at zero
  Eigen::MatrixXcd vectors;  // columns
};

struct SymEig {
  Eigen::VectorXd values;   // ascending, clamped at zero
  Eigen::MatrixXd vectors;  // columns
};

/// Eigendecomposition of a Hermitian PSD matrix; eigenvalues below
/// kEigClampTol * max are clamped to exactly zero.
HermEig hermitian_eig(const Eigen::MatrixXcd& m);
SymEig symmetric_eig(const Eigen::MatrixXd& m);

/// m^p through the eigendecomposition. Negative powers act as pseudo-inverse
/// powers on the clamped-positive part; `rank` (optional) receives the count
/// of positive eigenvalues.
Eigen::MatrixXcd hermitian_pow(const Eigen::MatrixXcd& m, double p, int* rank = nullptr);
Eigen::MatrixXd symmetric_pow(const Eigen::MatrixXd& m, double p, int* rank = nullptr);

/// Smallest eigenvalue of a Hermitian matrix (no clamping).
double min_hermitian_eigenvalue(const Eigen::MatrixXcd& m);

/// PSD check with a relative tolerance on the most negative eigenvalue.
bool is_psd(const Eigen::MatrixXcd& m, double rel_tol = 1e-10);

}  // namespace tbq
