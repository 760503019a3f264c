#include "tbq/task_model.hpp"

#include <Eigen/SVD>
#include <stdexcept>

#include "tbq/gauss_rd.hpp"
#include "tbq/linalg.hpp"

namespace tbq {

void TaskModel::validate() const {
  const int k = desired_dim(), l = observed_dim();
  if (k < 1 || l < k) throw std::invalid_argument("TaskModel: requires 1 <= K <= L");
  if (cov_y.rows() != l || cov_y.cols() != l || cov_g.rows() != k || cov_g.cols() != k)
    throw std::invalid_argument("TaskModel: covariance shapes do not match Gamma");
  if (!is_psd(cov_y)) throw std::invalid_argument("TaskModel: Sigma_y must be PSD");
  if (!is_psd(cov_g - lmmse * cov_y * lmmse.adjoint()))
    throw std::invalid_argument("TaskModel: Sigma_g - Gamma Sigma_y Gamma^H must be PSD");
}

Eigen::MatrixXcd TaskModel::estimate_cov() const { return lmmse * cov_y * lmmse.adjoint(); }

Eigen::VectorXd TaskModel::singular_values() const {
  Eigen::MatrixXcd gt = lmmse * hermitian_pow(cov_y, 0.5);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gt);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(desired_dim());
  phi.head(svd.singularValues().size()) = svd.singularValues();
  return phi;
}

double mmse_avg(const TaskModel& task) {
  task.validate();
  return (task.cov_g - task.estimate_cov()).trace().real() / task.desired_dim();
}

double mse_opt_vec(const TaskModel& task, double rate, int psd_grid) {
  if (rate < 0.0) throw std::invalid_argument("mse_opt_vec: rate must be nonnegative");
  // The MMSE-estimate source carries the full bit budget: L * rate bits per
  // K-dimensional vector sample.
  double excess = gaussian_dr(task.observed_dim() * rate, task.estimate_cov(),
                              task.correlation.psd_grid(psd_grid));
  return mmse_avg(task) + excess / task.desired_dim();
}

double mse_task_ignorant(const TaskModel& task, double rate) {
  if (rate < 0.0) throw std::invalid_argument("mse_task_ignorant: rate must be nonnegative");
  if (!task.correlation.is_uncorrelated())
    throw std::invalid_argument(
        "mse_task_ignorant: only the i.i.d. case has a closed form; "
        "correlated sample models are unsupported");
  // The observation quantizer spends L * rate bits per L-dimensional sample.
  Eigen::MatrixXcd marginal = optimal_marginal_cov(task.observed_dim() * rate, task.cov_y);
  Eigen::MatrixXcd gap = task.cov_y - marginal;
  double excess = (task.lmmse.adjoint() * task.lmmse * gap).trace().real();
  return mmse_avg(task) + excess / task.desired_dim();
}

}  // namespace tbq
