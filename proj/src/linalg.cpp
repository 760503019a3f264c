#include "tbq/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace tbq {

namespace {

template <typename Vec>
void clamp_eigs(Vec& v) {
  double top = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) top = std::max(top, std::abs(v[i]));
  double tol = kEigClampTol * top;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < tol) v[i] = 0.0;
}

Eigen::VectorXd pow_clamped(const Eigen::VectorXd& vals, double p, int* rank) {
  int r = 0;
  Eigen::VectorXd out(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] > 0.0) {
      out[i] = std::pow(vals[i], p);
      ++r;
    } else {
      out[i] = 0.0;
    }
  }
  if (rank) *rank = r;
  return out;
}

}  // namespace

HermEig hermitian_eig(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: eigendecomposition failed");
  HermEig out{es.eigenvalues(), es.eigenvectors()};
  clamp_eigs(out.values);
  return out;
}

SymEig symmetric_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_eig: eigendecomposition failed");
  SymEig out{es.eigenvalues(), es.eigenvectors()};
  clamp_eigs(out.values);
  return out;
}

Eigen::MatrixXcd hermitian_pow(const Eigen::MatrixXcd& m, double p, int* rank) {
  HermEig e = hermitian_eig(m);
  Eigen::VectorXd d = pow_clamped(e.values, p, rank);
  return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

Eigen::MatrixXd symmetric_pow(const Eigen::MatrixXd& m, double p, int* rank) {
  SymEig e = symmetric_eig(m);
  Eigen::VectorXd d = pow_clamped(e.values, p, rank);
  return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

double min_hermitian_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Eigen::MatrixXcd& m, double rel_tol) {
  if (m.size() == 0) return true;
  double scale = m.cwiseAbs().maxCoeff();
  return min_hermitian_eigenvalue(m) >= -rel_tol * std::max(scale, 1e-300);
}

}  // namespace tbq
