#include "tbq/mimo_estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "tbq/gauss_rd.hpp"
#include "tbq/linalg.hpp"

namespace tbq {

namespace {

double mimo_mmse(const NetworkRealization& net, int l, const MimoScenario& scn) {
  BPhi bp = b_phi_coeffs(net, l, scn);
  double acc = 0.0;
  for (int u = 0; u < scn.users; ++u)
    acc += net.d(l, l)[u] * net.d(l, l)[u] - bp.phi[u] * bp.phi[u];
  return acc / scn.users;
}

}  // namespace

double mimo_mse_opt(const NetworkRealization& net, int l, const MimoScenario& scn, double rate) {
  if (rate < 0.0) throw std::invalid_argument("mimo_mse_opt: rate must be nonnegative");
  BPhi bp = b_phi_coeffs(net, l, scn);
  // The estimate source is flat in the antenna index with per-user powers
  // phi^2; the channel-estimate quantizer carries pilots * rate bits per
  // antenna sample.
  Eigen::VectorXd eigs = bp.phi.cwiseAbs2();
  WaterfillResult wf = reverse_waterfill(eigs, Eigen::VectorXd::Ones(1), scn.pilots * rate);
  return mimo_mmse(net, l, scn) + wf.distortion / scn.users;
}

double mimo_mse_ign(const NetworkRealization& net, int l, const MimoScenario& scn, double rate) {
  return mse_task_ignorant(mimo_task_model(net, l, scn), rate);
}

double mimo_hl_mse(const NetworkRealization& net, int l, const MimoScenario& scn,
                   const QuantBudget& budget) {
  TaskModel task = mimo_task_model(net, l, scn);
  if (scn.correlation.is_uncorrelated()) return hl_mse_iid(task, budget);
  return hl_mse_correlated(task, budget, scn.antennas).omega_integral;
}

std::pair<HLDesign, double> mimo_hl(const NetworkRealization& net, int l,
                                    const MimoScenario& scn, const QuantBudget& budget) {
  TaskModel task = mimo_task_model(net, l, scn);
  HLDesign design = design_hl(task, budget, scn.antennas);
  double analytic = scn.correlation.is_uncorrelated()
                        ? hl_mse_iid(task, budget)
                        : hl_mse_correlated(task, budget, scn.antennas).omega_integral;
  return {std::move(design), analytic};
}

Eigen::VectorXd solve_spatial_allocation(const Eigen::VectorXd& phi, const Eigen::VectorXd& b,
                                         const Eigen::VectorXd& corr_eigs, int pilots,
                                         double levels, double kappa_val, double sigma_sq,
                                         int pt) {
  if (phi.size() != b.size()) throw std::invalid_argument("solve_spatial_allocation: size mismatch");
  if (corr_eigs.size() != pt) throw std::invalid_argument("solve_spatial_allocation: need pt eigenvalues");
  const double budget_total = 3.0 * levels * levels * pt / (4.0 * kappa_val * sigma_sq);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(pt);
  if (phi.maxCoeff() <= 0.0) return x;  // degenerate task: zero allocation

  const double tau = pilots;
  auto grad = [&](double xi) {
    // d/dx of sum_u tau phi^4 x / (tau phi^2 x + b^2)
    double g = 0.0;
    for (Eigen::Index u = 0; u < phi.size(); ++u) {
      double p2 = phi[u] * phi[u];
      double den = tau * p2 * xi + b[u] * b[u];
      g += tau * p2 * p2 * b[u] * b[u] / (den * den);
    }
    return g;
  };
  const double g0 = grad(0.0);
  auto x_of_nu = [&](double nu, Eigen::VectorXd& out) {
    double total = 0.0;
    for (int i = 0; i < pt; ++i) {
      double lam = corr_eigs[i];
      if (lam * g0 <= nu) {
        out[i] = 0.0;
        continue;
      }
      double lo = 0.0, hi = budget_total;
      while (lam * grad(hi) > nu) {
        hi *= 2.0;
        if (hi > 1e30) break;
      }
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (lam * grad(mid) > nu)
          lo = mid;
        else
          hi = mid;
      }
      out[i] = 0.5 * (lo + hi);
      total += out[i];
    }
    return total;
  };

  double nu_hi = corr_eigs.maxCoeff() * g0;
  double nu_lo = nu_hi;
  Eigen::VectorXd tmp(pt);
  while (x_of_nu(nu_lo, tmp) < budget_total) {
    nu_lo *= 0.5;
    if (nu_lo < 1e-300) break;
  }
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (nu_lo + nu_hi);
    if (x_of_nu(mid, tmp) >= budget_total)
      nu_lo = mid;
    else
      nu_hi = mid;
  }
  double total = x_of_nu(0.5 * (nu_lo + nu_hi), x);
  if (total > 0.0) x *= budget_total / total;  // pin the power constraint exactly
  return x.cwiseSqrt();
}

SpatialDesign spatial_design(const NetworkRealization& net, int l, const MimoScenario& scn,
                             const QuantBudget& budget) {
  scn.validate();
  const int n = scn.antennas, tau = scn.pilots, nu = scn.users;
  const int pt = int(std::lround(budget.ratio * n));
  if (pt < 1 || pt > n)
    throw std::invalid_argument("spatial_design: rf chain count must lie in [1, antennas]");
  if (budget.levels > double(1 << 30))
    throw std::invalid_argument("spatial_design: ADC resolution too large to materialize");

  Eigen::MatrixXcd cov = output_covariance(net, l, scn);
  double sigma_sq = cov.diagonal().real().maxCoeff();
  BPhi bp = b_phi_coeffs(net, l, scn);

  Eigen::MatrixXd corr = scn.correlation.toeplitz(n);
  SymEig ce = symmetric_eig(corr);
  Eigen::VectorXd lam_desc = ce.values.reverse();
  Eigen::MatrixXd vc_desc(n, n);
  for (int k = 0; k < n; ++k) vc_desc.col(k) = ce.vectors.col(n - 1 - k);

  Eigen::VectorXd gains = solve_spatial_allocation(bp.phi, bp.b, lam_desc.head(pt), tau,
                                                   budget.levels, budget.kappa, sigma_sq, pt);

  double gamma = std::sqrt(3.0) * budget.levels / 2.0;  // gamma^2 = 3 M^2 / 4
  SpatialDesign d{ScalarQuantizer(gamma, int(budget.levels), budget.eta)};
  d.antennas = n;
  d.rf_chains = pt;
  d.sigma_sq = sigma_sq;
  d.gains = gains;
  d.rotation = equal_diag_rotation(gains.cwiseAbs2());

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(pt, n);
  for (int i = 0; i < pt; ++i)
    if (lam_desc[i] > 0.0 && gains[i] > 0.0)
      rows.row(i) = (gains[i] / std::sqrt(lam_desc[i])) * vc_desc.col(i).transpose();
  d.combiner = (d.rotation * rows).cast<Complex>();

  HermEig se = hermitian_eig(cov);
  d.cov_eigvecs = se.vectors;
  d.cov_eigvals = se.values;
  Eigen::MatrixXcd corr_c = corr.cast<Complex>();
  d.synth_left = corr_c * d.combiner.adjoint() * d.rotation.cast<Complex>();
  Eigen::MatrixXcd theta = pilot_matrix(tau, nu);
  Eigen::MatrixXcd d2 = net.d(l, l).cwiseAbs2().asDiagonal().toDenseMatrix().cast<Complex>();
  d.synth_right = (d2 * theta.conjugate() * se.vectors).transpose();

  // Finite-chain average of the spatial MSE expression.
  double excess = bp.phi.squaredNorm();
  double r = double(pt) / n;
  double gainsum = 0.0;
  for (int i = 0; i < pt; ++i) {
    double xi = gains[i] * gains[i];
    for (int u = 0; u < nu; ++u) {
      double p2 = bp.phi[u] * bp.phi[u];
      double den = tau * p2 * xi + bp.b[u] * bp.b[u];
      if (den > 0.0) gainsum += tau * p2 * p2 * xi * lam_desc[i] / den;
    }
  }
  excess -= r * gainsum / pt;
  d.predicted_mse = mimo_mmse(net, l, scn) + excess / nu;
  return d;
}

Eigen::MatrixXcd SpatialDesign::analog(const Eigen::MatrixXcd& y) const { return combiner * y; }

Eigen::MatrixXcd SpatialDesign::digital(const Eigen::MatrixXcd& q) const {
  Eigen::MatrixXcd w = rotation.transpose().cast<Complex>() * q * cov_eigvecs.conjugate();
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      w(i, j) /= cov_eigvals[j] * gains[i] * gains[i] + 1.0;
  return synth_left * w * synth_right;
}

Eigen::MatrixXcd SpatialDesign::dense_digital() const {
  const int nu = int(synth_right.cols());
  Eigen::MatrixXcd b(antennas * nu, size_t(rf_chains) * synth_right.rows());
  Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(rf_chains, synth_right.rows());
  for (int j = 0; j < synth_right.rows(); ++j)
    for (int i = 0; i < rf_chains; ++i) {
      unit(i, j) = 1.0;
      Eigen::MatrixXcd g = digital(unit);
      unit(i, j) = 0.0;
      for (int uu = 0; uu < nu; ++uu)
        b.block(uu * antennas, j * rf_chains + i, antennas, 1) = g.col(uu);
    }
  return b;
}

double spatial_mse_iid(const NetworkRealization& net, int l, const MimoScenario& scn,
                       const QuantBudget& budget) {
  if (!scn.correlation.is_uncorrelated())
    throw std::invalid_argument("spatial_mse_iid: closed form holds for uncorrelated antennas; "
                                "use spatial_design for correlated models");
  Eigen::MatrixXcd cov = output_covariance(net, l, scn);
  double sigma_sq = cov.diagonal().real().maxCoeff();
  BPhi bp = b_phi_coeffs(net, l, scn);
  const double noise = 4.0 * budget.kappa * sigma_sq /
                       (3.0 * budget.levels * budget.levels * scn.pilots);
  double excess = 0.0;
  for (int u = 0; u < scn.users; ++u) {
    double p2 = bp.phi[u] * bp.phi[u];
    double den = p2 + noise * bp.b[u] * bp.b[u];
    excess += p2 - (den > 0.0 ? budget.ratio * p2 * p2 / den : 0.0);
  }
  return mimo_mmse(net, l, scn) + excess / scn.users;
}

namespace {

double digital_noise_var(double rate) {
  double levels = std::floor(std::exp2(std::min(rate / 2.0, 500.0)));
  if (levels < 1.0) throw std::invalid_argument("digital_only: rate too small");
  return 4.0 / (3.0 * levels * levels);  // gamma fixed to 1
}

}  // namespace

double digital_only_mse(const NetworkRealization& net, int l, const MimoScenario& scn,
                        double rate, int n) {
  const double c = digital_noise_var(rate);
  Eigen::MatrixXcd cov = output_covariance(net, l, scn);
  Eigen::MatrixXcd theta = pilot_matrix(scn.pilots, scn.users);
  Eigen::VectorXd d4 = net.d(l, l).cwiseAbs2().cwiseAbs2();
  Eigen::MatrixXcd m = theta.transpose() * d4.asDiagonal() * theta.conjugate();
  BPhi bp = b_phi_coeffs(net, l, scn);

  double recovered = 0.0;
  if (scn.correlation.is_uncorrelated()) {
    Eigen::MatrixXcd inv = (cov + c * Eigen::MatrixXcd::Identity(scn.pilots, scn.pilots))
                               .ldlt()
                               .solve(m);
    recovered = inv.trace().real();
  } else {
    SymEig ce = symmetric_eig(scn.correlation.toeplitz(n));
    for (int k = 0; k < n; ++k) {
      double lam = ce.values[k];
      if (lam <= 0.0) continue;
      Eigen::MatrixXcd inv =
          (lam * cov + c * Eigen::MatrixXcd::Identity(scn.pilots, scn.pilots)).ldlt().solve(m);
      recovered += lam * lam * inv.trace().real() / n;
    }
  }
  return mimo_mmse(net, l, scn) + (bp.phi.squaredNorm() - recovered) / scn.users;
}

DigitalOnlyDesign digital_only_design(const NetworkRealization& net, int l,
                                      const MimoScenario& scn, double rate) {
  double levels = std::floor(std::exp2(std::min(rate / 2.0, 30.0)));
  if (levels < 2.0)
    throw std::invalid_argument("digital_only_design: needs rate >= 2 for a realizable ADC");
  DigitalOnlyDesign d{ScalarQuantizer(1.0, int(levels), 2.0)};
  const int n = scn.antennas;
  d.antennas = n;
  d.noise_var = noise_model_variance(d.adc);

  SymEig ce = symmetric_eig(scn.correlation.toeplitz(n));
  d.corr_eigvecs = ce.vectors;
  d.corr_eigvals = ce.values;
  Eigen::MatrixXcd cov = output_covariance(net, l, scn);
  HermEig se = hermitian_eig(cov);
  d.cov_eigvecs = se.vectors;
  d.cov_eigvals = se.values;
  d.synth_left = (scn.correlation.toeplitz(n) * ce.vectors).cast<Complex>();
  Eigen::MatrixXcd theta = pilot_matrix(scn.pilots, scn.users);
  Eigen::MatrixXcd d2 = net.d(l, l).cwiseAbs2().asDiagonal().toDenseMatrix().cast<Complex>();
  d.synth_right = (d2 * theta.conjugate() * se.vectors).transpose();
  d.predicted_mse = digital_only_mse(net, l, scn, rate, n);
  return d;
}

Eigen::MatrixXcd DigitalOnlyDesign::digital(const Eigen::MatrixXcd& q) const {
  Eigen::MatrixXcd w = corr_eigvecs.transpose().cast<Complex>() * q * cov_eigvecs.conjugate();
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      w(i, j) /= cov_eigvals[j] * corr_eigvals[i] + noise_var;
  return synth_left * w * synth_right;
}

}  // namespace tbq
