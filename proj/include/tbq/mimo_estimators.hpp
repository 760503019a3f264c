#pragma once

#include <Eigen/Dense>
#include <utility>

#include "tbq/common.hpp"
#include "tbq/hl_design.hpp"
#include "tbq/mimo_model.hpp"

namespace tbq {

/// Lower bound: optimal vector quantizer for channel estimation at `rate`
/// bits per received complex sample.
double mimo_mse_opt(const NetworkRealization& net, int l, const MimoScenario& scn, double rate);

/// Task-ignorant vector quantizer (uncorrelated antennas only).
double mimo_mse_ign(const NetworkRealization& net, int l, const MimoScenario& scn, double rate);

/// Analytic MSE of the optimal hardware-limited system (general analog
/// combining): closed form for uncorrelated antennas, spectral integral
/// otherwise (the latter requires pq >= rank).
double mimo_hl_mse(const NetworkRealization& net, int l, const MimoScenario& scn,
                   const QuantBudget& budget);

/// Materialized hardware-limited design for cell l plus its analytic MSE.
std::pair<HLDesign, double> mimo_hl(const NetworkRealization& net, int l,
                                    const MimoScenario& scn, const QuantBudget& budget);

/// KKT solver of the spatial power allocation: maximizes
///   sum_i sum_u tau phi_u^4 x_i lam_c_i / (tau phi_u^2 x_i + b_u^2),
/// x_i = a_i^2, subject to (4 kappa sigma_sq / (3 M^2 pt)) sum_i x_i = 1.
/// Returns the gains a_i (nonnegative), paired with corr_eigs descending.
Eigen::VectorXd solve_spatial_allocation(const Eigen::VectorXd& phi, const Eigen::VectorXd& b,
                                         const Eigen::VectorXd& corr_eigs, int pilots,
                                         double levels, double kappa_val, double sigma_sq,
                                         int pt);

/// Spatial-only analog combining design (one combiner applied per pilot
/// symbol, no temporal mixing). Support convention gamma^2 = 3 M^2 / 4.
struct SpatialDesign {
  explicit SpatialDesign(ScalarQuantizer q) : adc(q) {}

  int antennas = 0;
  int rf_chains = 0;           // P_T = ratio * antennas
  ScalarQuantizer adc;
  double predicted_mse = 0.0;
  double sigma_sq = 0.0;       // max diagonal entry of Sigma_Y
  Eigen::VectorXd gains;       // a_i, descending eigen pairing
  Eigen::MatrixXcd combiner;   // A~, P_T x antennas

  // Digital-stage factors:
  //   B~ = (D^2 Theta^* (x) C A~^H) ((Sigma_Y (x) A~ C A~^H) + I)^{-1}
  Eigen::MatrixXd rotation;      // U, P_T x P_T
  Eigen::MatrixXcd cov_eigvecs;  // V of Sigma_Y
  Eigen::VectorXd cov_eigvals;
  Eigen::MatrixXcd synth_left;   // C A~^H U, antennas x P_T
  Eigen::MatrixXcd synth_right;  // (D^2 Theta^* V)^T, pilots x users

  Eigen::MatrixXcd analog(const Eigen::MatrixXcd& y) const;   // P_T x pilots
  Eigen::MatrixXcd digital(const Eigen::MatrixXcd& q) const;  // antennas x users
  Eigen::MatrixXcd dense_digital() const;  // (antennas users) x (P_T pilots), small sizes
};

SpatialDesign spatial_design(const NetworkRealization& net, int l, const MimoScenario& scn,
                             const QuantBudget& budget);

/// Closed-form spatial MSE for uncorrelated antennas.
double spatial_mse_iid(const NetworkRealization& net, int l, const MimoScenario& scn,
                       const QuantBudget& budget);

/// Linear-MMSE estimation from directly quantized channel outputs (no analog
/// combining, support fixed to 1): the digital-only baseline at horizon n.
double digital_only_mse(const NetworkRealization& net, int l, const MimoScenario& scn,
                        double rate, int n);

/// Realized digital-only chain for simulation.
struct DigitalOnlyDesign {
  explicit DigitalOnlyDesign(ScalarQuantizer q) : adc(q) {}

  int antennas = 0;
  ScalarQuantizer adc;
  double predicted_mse = 0.0;
  double noise_var = 0.0;

  Eigen::MatrixXd corr_eigvecs;
  Eigen::VectorXd corr_eigvals;
  Eigen::MatrixXcd cov_eigvecs;
  Eigen::VectorXd cov_eigvals;
  Eigen::MatrixXcd synth_left;   // C V_c, antennas x antennas
  Eigen::MatrixXcd synth_right;  // (D^2 Theta^* V)^T, pilots x users

  Eigen::MatrixXcd analog(const Eigen::MatrixXcd& y) const { return y; }
  Eigen::MatrixXcd digital(const Eigen::MatrixXcd& q) const;
};

DigitalOnlyDesign digital_only_design(const NetworkRealization& net, int l,
                                      const MimoScenario& scn, double rate);

}  // namespace tbq
