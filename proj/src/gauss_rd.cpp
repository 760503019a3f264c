#include "tbq/gauss_rd.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tbq/linalg.hpp"

namespace tbq {

void GaussianSourceSpec::validate() const {
  if (covariance.rows() != covariance.cols())
    throw std::invalid_argument("GaussianSourceSpec: covariance must be square");
  if ((covariance - covariance.adjoint()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, covariance.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("GaussianSourceSpec: covariance must be Hermitian");
  if (!is_psd(covariance)) throw std::invalid_argument("GaussianSourceSpec: covariance must be PSD");
  if (psd.size() == 0 || psd.minCoeff() < 0.0)
    throw std::invalid_argument("GaussianSourceSpec: PSD samples must be nonnegative");
  if (normalized_psd && std::abs(psd.mean() - 1.0) > 1e-6)
    throw std::invalid_argument("GaussianSourceSpec: normalized PSD grid mean must be 1");
}

namespace {

// Spectrum of positive (eigenvalue x PSD sample) products with grid weights.
struct Spectrum {
  std::vector<double> log2p;  // log2 of each positive product
  std::vector<double> p;
  double weight = 0.0;        // per-sample weight 1/n_grid
  double zero_mass = 0.0;     // summed min(zeta, 0) contribution is zero; kept for clarity
  double log2p_max = -1e300;
};

Spectrum collect(const Eigen::VectorXd& eigs, const Eigen::VectorXd& psd) {
  Spectrum s;
  s.weight = 1.0 / double(psd.size());
  s.p.reserve(size_t(eigs.size()) * size_t(psd.size()));
  for (Eigen::Index k = 0; k < psd.size(); ++k) {
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
      double prod = eigs[i] * psd[k];
      if (prod > 0.0) {
        s.p.push_back(prod);
        s.log2p.push_back(std::log2(prod));
        s.log2p_max = std::max(s.log2p_max, s.log2p.back());
      }
    }
  }
  return s;
}

// Rate at water level 2^x, evaluated in the log domain so that arbitrarily
// deep water levels never underflow.
double rate_at(const Spectrum& s, double x) {
  double acc = 0.0;
  for (double lp : s.log2p) {
    double d = lp - x;
    if (d > 0.0) acc += d;
  }
  return acc * s.weight;
}

double distortion_at(const Spectrum& s, double zeta) {
  double acc = 0.0;
  for (double p : s.p) acc += std::min(zeta, p);
  return acc * s.weight;
}

}  // namespace

WaterfillResult reverse_waterfill(const Eigen::VectorXd& eigs, const Eigen::VectorXd& psd,
                                  double rate) {
  if (rate < 0.0) throw std::invalid_argument("reverse_waterfill: rate must be nonnegative");
  if (psd.size() == 0) throw std::invalid_argument("reverse_waterfill: empty PSD grid");
  if (eigs.size() > 0 && eigs.minCoeff() < 0.0)
    throw std::invalid_argument("reverse_waterfill: negative eigenvalue");
  if (psd.minCoeff() < 0.0) throw std::invalid_argument("reverse_waterfill: negative PSD sample");

  Spectrum s = collect(eigs, psd);
  if (s.p.empty()) return {0.0, 0.0, 0.0, false};

  WaterfillResult out;
  if (rate == 0.0) {
    out.water_level = std::exp2(s.log2p_max);
    out.distortion = distortion_at(s, out.water_level);
    out.rate_residual = 0.0;
    return out;
  }

  // Bisection on x = log2(zeta). The rate is continuous, piecewise linear and
  // strictly decreasing in x wherever positive, so any bracket with
  // rate(lo) >= rate >= rate(hi) converges.
  double hi = s.log2p_max;
  double span = rate + 2.0;
  double lo = hi - span;
  while (rate_at(s, lo) < rate) {
    span *= 2.0;
    lo = hi - span;
    if (span > 1e12) throw std::runtime_error("reverse_waterfill: bracket expansion failed");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (rate_at(s, mid) >= rate)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  out.water_level = std::exp2(x);
  out.distortion = distortion_at(s, out.water_level);
  out.rate_residual = std::abs(rate_at(s, x) - rate);
  if (out.rate_residual > 1e-9 * std::max(1.0, rate))
    throw std::runtime_error("reverse_waterfill: rate residual above tolerance");
  return out;
}

double gaussian_dr(double rate, const Eigen::MatrixXcd& cov, const Eigen::VectorXd& psd) {
  HermEig e = hermitian_eig(cov);
  return reverse_waterfill(e.values, psd, rate).distortion;
}

double gaussian_dr(double rate, const GaussianSourceSpec& src) {
  src.validate();
  return gaussian_dr(rate, src.covariance, src.psd);
}

Eigen::MatrixXcd optimal_marginal_cov(double rate, const Eigen::MatrixXcd& cov) {
  HermEig e = hermitian_eig(cov);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(1);
  WaterfillResult wf = reverse_waterfill(e.values, ones, rate);
  if (!wf.water_level_defined) return Eigen::MatrixXcd::Zero(cov.rows(), cov.cols());
  Eigen::VectorXd d = (e.values.array() - wf.water_level).cwiseMax(0.0);
  return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

}  // namespace tbq
