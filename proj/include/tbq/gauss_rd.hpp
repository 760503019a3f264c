#pragma once

#include <Eigen/Dense>

#include "tbq/common.hpp"

namespace tbq {

/// Proper-complex Gaussian vector stationary source: per-sample covariance and
/// scalar PSD samples on a uniform grid of [0, 2pi). A one-point grid {1}
/// represents an i.i.d.-in-time source exactly.
struct GaussianSourceSpec {
  Eigen::MatrixXcd covariance;
  Eigen::VectorXd psd;
  // Set when the PSD comes from a correlation sequence with c[0] = 1; the grid
  // mean must then be 1 within grid tolerance.
  bool normalized_psd = false;

  void validate() const;
};

struct WaterfillResult {
  double water_level = 0.0;      // zeta
  double distortion = 0.0;       // D
  double rate_residual = 0.0;    // |R - R(zeta)|
  bool water_level_defined = true;
};

/// Reverse waterfilling for the Gaussian distortion-rate function. `rate` is
/// in bits per vector sample:
///   rate = mean_k sum_i (log2(eigs_i psd_k / zeta))^+
///   D    = mean_k sum_i min(zeta, eigs_i psd_k)
/// An all-zero spectrum returns D = 0 with water_level_defined = false.
WaterfillResult reverse_waterfill(const Eigen::VectorXd& eigs, const Eigen::VectorXd& psd,
                                  double rate);

/// D_G(rate, cov, psd): distortion-rate function of the source, rate in bits
/// per vector sample.
double gaussian_dr(double rate, const Eigen::MatrixXcd& cov, const Eigen::VectorXd& psd);
double gaussian_dr(double rate, const GaussianSourceSpec& src);

/// Covariance of the optimal marginal distortion-rate distribution for an
/// i.i.d.-in-time source: U diag((lambda_i - zeta)^+) U^H. `rate` is in bits
/// per vector sample.
Eigen::MatrixXcd optimal_marginal_cov(double rate, const Eigen::MatrixXcd& cov);

}  // namespace tbq
