#pragma once

#include <Eigen/Dense>

#include "tbq/common.hpp"
#include "tbq/correlation.hpp"

namespace tbq {

/// A desired-signal recovery task: per-sample observation covariance, desired
/// covariance, the LMMSE matrix relating them, and the sample correlation.
struct TaskModel {
  Eigen::MatrixXcd lmmse;  // Gamma, K x L
  Eigen::MatrixXcd cov_y;  // Sigma_y, L x L
  Eigen::MatrixXcd cov_g;  // Sigma_g, K x K
  CorrelationModel correlation = CorrelationModel::uncorrelated();

  int desired_dim() const { return int(lmmse.rows()); }   // K
  int observed_dim() const { return int(lmmse.cols()); }  // L

  /// Throws unless L >= K, shapes agree and Sigma_g - Gamma Sigma_y Gamma^H
  /// is PSD.
  void validate() const;

  /// Covariance of the per-sample MMSE estimate, Gamma Sigma_y Gamma^H.
  Eigen::MatrixXcd estimate_cov() const;

  /// Singular values of Gamma Sigma_y^{1/2}, descending, padded to length K.
  Eigen::VectorXd singular_values() const;
};

/// Average MMSE per desired entry, (1/K) tr(Sigma_g - Gamma Sigma_y Gamma^H);
/// the quantization-free floor.
double mmse_avg(const TaskModel& task);

/// Average MSE of the optimal vector quantizer at `rate` bits per observed
/// complex sample.
double mse_opt_vec(const TaskModel& task, double rate, int psd_grid = kDefaultPsdGrid);

/// Average MSE of the task-ignorant vector quantizer (i.i.d. samples only).
double mse_task_ignorant(const TaskModel& task, double rate);

}  // namespace tbq
