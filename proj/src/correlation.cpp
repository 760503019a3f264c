#include "tbq/correlation.hpp"

#include <cmath>
#include <stdexcept>

namespace tbq {

double jakes_correlation(double spacing, long lag) {
  if (!(spacing > 0.0)) throw std::invalid_argument("jakes_correlation: spacing must be positive");
  return std::cyl_bessel_j(0.0, 2.0 * kPi * spacing * std::abs(double(lag)));
}

CorrelationModel CorrelationModel::uncorrelated() { return CorrelationModel{}; }

CorrelationModel CorrelationModel::jakes(double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("CorrelationModel::jakes: spacing must be positive");
  CorrelationModel m;
  m.kind_ = CorrelationKind::kJakes;
  m.spacing_ = spacing;
  return m;
}

CorrelationModel CorrelationModel::explicit_sequence(std::vector<double> c) {
  if (c.empty() || std::abs(c[0] - 1.0) > 1e-12)
    throw std::invalid_argument("CorrelationModel::explicit_sequence: c[0] must be 1");
  CorrelationModel m;
  m.kind_ = CorrelationKind::kExplicit;
  m.seq_ = std::move(c);
  // Reject sequences whose spectrum goes noticeably negative.
  Eigen::VectorXd s = m.psd_grid(512);
  (void)s;
  return m;
}

bool CorrelationModel::is_uncorrelated() const {
  if (kind_ == CorrelationKind::kUncorrelated) return true;
  if (kind_ == CorrelationKind::kExplicit) {
    for (size_t i = 1; i < seq_.size(); ++i)
      if (seq_[i] != 0.0) return false;
    return true;
  }
  return false;
}

double CorrelationModel::at(long lag) const {
  long a = std::abs(lag);
  switch (kind_) {
    case CorrelationKind::kUncorrelated:
      return a == 0 ? 1.0 : 0.0;
    case CorrelationKind::kJakes:
      return a == 0 ? 1.0 : jakes_correlation(spacing_, a);
    case CorrelationKind::kExplicit:
      return a < long(seq_.size()) ? seq_[size_t(a)] : 0.0;
  }
  return 0.0;
}

Eigen::MatrixXd CorrelationModel::toeplitz(int n) const {
  if (n < 1) throw std::invalid_argument("CorrelationModel::toeplitz: n must be positive");
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = at(i - j);
  return c;
}

namespace {

// Antiderivative of the Jakes line spectrum 2 / sqrt(beta^2 - w^2) restricted
// to (-beta, beta), clipped outside.
double jakes_cdf(double w, double beta) {
  if (w <= -beta) return -kPi;
  if (w >= beta) return kPi;
  return 2.0 * std::asin(w / beta);
}

}  // namespace

Eigen::VectorXd CorrelationModel::psd_grid(int n_points) const {
  if (n_points < 1) throw std::invalid_argument("CorrelationModel::psd_grid: n_points must be positive");
  if (is_uncorrelated()) return Eigen::VectorXd::Ones(1);

  Eigen::VectorXd s(n_points);
  if (kind_ == CorrelationKind::kJakes) {
    // Aliased spectrum of J0(beta t) sampled at unit lag; exact cell averages
    // keep the grid mean at exactly a[0] = 1 despite the band-edge poles.
    double beta = 2.0 * kPi * spacing_;
    double h = 2.0 * kPi / n_points;
    int alias = int(std::ceil((beta + kPi) / (2.0 * kPi))) + 1;
    for (int k = 0; k < n_points; ++k) {
      double lo = k * h - 0.5 * h;
      double hi = lo + h;
      double mass = 0.0;
      for (int j = -alias; j <= alias; ++j) {
        double shift = 2.0 * kPi * j;
        mass += jakes_cdf(hi - shift, beta) - jakes_cdf(lo - shift, beta);
      }
      s[k] = mass / h;
    }
  } else {
    for (int k = 0; k < n_points; ++k) {
      double w = 2.0 * kPi * k / n_points;
      double v = 1.0;
      for (size_t t = 1; t < seq_.size(); ++t) v += 2.0 * seq_[t] * std::cos(w * double(t));
      if (v < -1e-9)
        throw std::invalid_argument("CorrelationModel: explicit sequence has a negative spectrum");
      s[k] = std::max(v, 0.0);
    }
  }
  return s;
}

}  // namespace tbq
