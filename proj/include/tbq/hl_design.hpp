#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "tbq/common.hpp"
#include "tbq/dither_quant.hpp"
#include "tbq/task_model.hpp"

namespace tbq {

/// Rate budget of a hardware-limited quantizer: total rate R bits per complex
/// input sample, split across identical scalar ADCs selected by the analog
/// combining ratio r. With L-dimensional samples the quantizer count per
/// sample splits as r*L = pq + pr_fraction.
struct QuantBudget {
  double rate = 0.0;
  double ratio = 1.0;
  int pq = 0;
  double pr_fraction = 0.0;  // r*L - pq, in [0, 1)
  double eta = 2.0;
  double levels = 2.0;       // M = floor(2^{R/(2r)}); integer-valued, kept as double
  double kappa = 0.0;        // kappa(eta, M)

  double support() const;    // gamma = sqrt(kappa / r)
  double rl() const { return pq + pr_fraction; }

  static QuantBudget make(double rate, double ratio, int observed_dim, double eta = 2.0);
  void validate(int observed_dim) const;
};

struct HlWaterfill {
  double zeta = 0.0;
  Eigen::VectorXd lambda_sq;  // per-quantizer gains, averaging to 1
};

/// Waterfilling of the hardware-limited design: zeta solves
///   (4 kappa / (3 M^2 P)) sum_l (zeta sv_l - 1)^+ = 1,   P = sv.size(),
/// and lambda_sq_l = (4 kappa / (3 M^2)) (zeta sv_l - 1)^+.
HlWaterfill hl_waterfill(const Eigen::VectorXd& sv, double levels, double kappa_val);

/// Weighted form of the normalization: zeta solves
///   (4 kappa / (3 M^2 weight_norm)) sum_l w_l (zeta sv_l - 1)^+ = 1.
double hl_waterfill_zeta(const Eigen::VectorXd& sv, const Eigen::VectorXd& weights,
                         double weight_norm, double levels, double kappa_val);

/// Real orthogonal U such that U diag(d) U^T has constant diagonal mean(d),
/// with the spectrum preserved. Built from at most d.size()-1 Givens
/// rotations, each fixing one diagonal entry exactly.
Eigen::MatrixXd equal_diag_rotation(const Eigen::VectorXd& d);

/// Largest useful quantizer quotient: rank of Gamma Sigma_y^2 Gamma^H, with
/// eigenvalues below 1e-12 of the maximum treated as zero.
int max_useful_pq(const TaskModel& task);

/// Asymptotic average MSE of the optimal hardware-limited design for
/// uncorrelated samples, any pq >= 0 (includes the fractional-remainder term).
double hl_mse_iid(const TaskModel& task, const QuantBudget& budget);

struct CorrelatedHlMse {
  double finite_n = 0.0;        // Toeplitz-eigenvalue average at the given horizon
  double omega_integral = 0.0;  // spectral-integral reference (horizon -> infinity)
};

/// Asymptotic average MSE for correlated samples; valid only when
/// pq >= rank(Gamma Sigma_y Gamma^H), otherwise throws (use Monte-Carlo).
CorrelatedHlMse hl_mse_correlated(const TaskModel& task, const QuantBudget& budget, int n,
                                  int psd_grid = kDefaultPsdGrid);

/// A materialized hardware-limited quantization system at horizon n:
/// analog combiner, identical dithered scalar ADCs and linear digital stage.
/// Uncorrelated tasks with pr = 0 factor into a per-sample map (A' applied to
/// every sample); otherwise the combiner acts on the full n*L input.
struct HLDesign {
  explicit HLDesign(ScalarQuantizer q) : adc(q) {}

  int n = 1;
  int quantizer_count = 0;  // P (per-sample form: P_q)
  bool per_sample = false;
  ScalarQuantizer adc;
  double zeta = 0.0;
  double predicted_mse = 0.0;
  double noise_var = 0.0;      // 4 gamma^2 / (3 M^2)
  Eigen::VectorXd lambda_sq;   // diagonal gains, length P
  bool rank_warning = false;   // pq exceeds the useful rank
  int rank_cov_y = 0;
  int rank_corr = 0;

  // Per-sample factors (per_sample == true).
  Eigen::MatrixXcd combiner_ps;  // A', P_q x L
  Eigen::MatrixXcd digital_ps;   // B', K x P_q

  // Full-path factors (per_sample == false). The combiner rows and digital
  // columns are Kronecker products of a component-space vector and a
  // sample-space eigenvector of C_n:
  //   A = U diag(lambda) [rows (vh_sinv.row(i) (x) whiten_left.row(k))],
  //   B = [cols (left_wphi.col(i) (x) synth_left.col(k))] diag(.) U^T.
  Eigen::MatrixXd rotation;     // U, P x P
  Eigen::MatrixXcd vh_sinv;     // V^H Sigma_y^{-1/2}, L x L
  Eigen::MatrixXd whiten_left;  // Lambda_c^{-1/2} V_c^T (eigencolumns of C_n, descending)
  Eigen::MatrixXd synth_left;   // V_c Lambda_c^{1/2}
  Eigen::MatrixXcd left_wphi;   // W Phi, K x L
  std::vector<std::pair<int, int>> mode_index;  // (component, sample-eigenmode) per quantizer

  /// Pre-ADC signal for one block: input y is n x L (samples as rows).
  /// Returns n x P_q (per-sample) or P x 1 (full).
  Eigen::MatrixXcd analog(const Eigen::MatrixXcd& y) const;

  /// Digital estimate from the quantized signal; returns n x K.
  Eigen::MatrixXcd digital(const Eigen::MatrixXcd& q) const;

  /// Dense matrices under the vec convention (column-major n x L input);
  /// intended for small horizons and serialization.
  Eigen::MatrixXcd dense_combiner() const;  // P x (n L)
  Eigen::MatrixXcd dense_digital() const;   // (n K) x P
};

HLDesign design_hl(const TaskModel& task, const QuantBudget& budget, int n);

}  // namespace tbq
