#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tbq/common.hpp"
#include "tbq/correlation.hpp"
#include "tbq/rng.hpp"
#include "tbq/task_model.hpp"

namespace tbq {

/// Multi-cell uplink scenario. Defaults follow the usual massive-MIMO study
/// setup: 7 hexagonal cells of radius 400 m, 10 single-antenna users per
/// cell, 40-symbol pilots, noise power 1e-3, 8 dB log-normal shadowing and
/// inverse-square path loss.
struct MimoScenario {
  int cells = 7;
  int users = 10;
  int pilots = 40;
  double noise_power = 1e-3;       // sigma_w^2
  double cell_radius = 400.0;      // m
  double exclusion_radius = 20.0;  // m
  double shadow_std_db = 8.0;
  double pathloss_exponent = 2.0;
  CorrelationModel correlation = CorrelationModel::uncorrelated();
  int antennas = 100;              // finite materialization horizon

  void validate() const;
};

/// One draw of the network geometry: attenuation d_{l,m,u} between the u-th
/// user of cell m and base station l. Own-cell coefficients are sorted
/// descending (users of each cell are indexed by decreasing own-cell gain).
struct NetworkRealization {
  int cells = 0;
  int users = 0;
  std::uint64_t seed = 0;
  std::vector<Eigen::VectorXd> attenuation;  // index l * cells + m

  const Eigen::VectorXd& d(int l, int m) const { return attenuation[size_t(l) * cells + m]; }
  Eigen::VectorXd& d(int l, int m) { return attenuation[size_t(l) * cells + m]; }
};

NetworkRealization generate_network(const MimoScenario& scn, std::uint64_t seed);

/// Pilot matrix Theta (users x pilots): the first `users` rows of the
/// pilots x pilots DFT matrix, so Theta Theta^H = pilots * I exactly.
Eigen::MatrixXcd pilot_matrix(int pilots, int users);

/// Per-symbol channel-output covariance sum_m Theta^T D_{l,m}^2 Theta^* +
/// sigma_w^2 I (pilots x pilots).
Eigen::MatrixXcd output_covariance(const NetworkRealization& net, int l, const MimoScenario& scn);

struct BPhi {
  Eigen::VectorXd b;    // pilot-quality coefficients in (0, 1)
  Eigen::VectorXd phi;  // sqrt(b) d
};
BPhi b_phi_coeffs(const NetworkRealization& net, int l, const MimoScenario& scn);

/// The channel-estimation task of cell l as a TaskModel: K = users,
/// L = pilots, Gamma = pilots^{-1} B Theta^*, Sigma_g = D_{l,l}^2.
TaskModel mimo_task_model(const NetworkRealization& net, int l, const MimoScenario& scn);

struct ChannelDraw {
  Eigen::MatrixXcd g;  // own-cell channel, antennas x users
  Eigen::MatrixXcd y;  // received pilots, antennas x pilots
};

/// One block-fading draw: Y = sum_m C^{1/2} H_m D_{l,m} Theta + W with
/// W columns of covariance sigma_w^2 C.
ChannelDraw simulate_channel_outputs(const NetworkRealization& net, int l,
                                     const MimoScenario& scn, Rng& rng);

/// Unquantized MMSE channel estimate pilots^{-1} Y Theta^H B_l.
Eigen::MatrixXcd mmse_channel_estimate(const Eigen::MatrixXcd& y, const NetworkRealization& net,
                                       int l, const MimoScenario& scn);

}  // namespace tbq
