#include "tbq/dither_quant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tbq {

double kappa(double eta, double levels) {
  if (!(eta > 0.0) || !(levels >= 2.0))
    throw std::invalid_argument("kappa: requires eta > 0 and levels >= 2");
  if (!(eta < std::sqrt(1.5) * levels))
    throw std::invalid_argument("kappa: eta must satisfy eta < sqrt(3/2)*levels (eta=" +
                                std::to_string(eta) + ", levels=" + std::to_string(levels) + ")");
  return eta * eta / (1.0 - 2.0 * eta * eta / (3.0 * levels * levels));
}

ScalarQuantizer::ScalarQuantizer(double support_, int levels_, double eta_)
    : support(support_), levels(levels_), spacing(2.0 * support_ / levels_), eta(eta_) {
  if (!(support > 0.0) || levels < 2)
    throw std::invalid_argument("ScalarQuantizer: requires support > 0 and levels >= 2");
  (void)kappa(eta, levels);  // validates the eta/levels bound
}

double noise_model_variance(const ScalarQuantizer& q) {
  return 4.0 * q.support * q.support / (3.0 * double(q.levels) * double(q.levels));
}

double uniform_level(double x, const ScalarQuantizer& q) {
  if (!std::isfinite(x)) throw std::invalid_argument("uniform_level: non-finite input");
  if (std::abs(x) > q.support)
    return (x > 0 ? 1.0 : -1.0) * (q.support - 0.5 * q.spacing);
  int cell = int(std::floor((x + q.support) / q.spacing));
  if (cell < 0) cell = 0;
  if (cell >= q.levels) cell = q.levels - 1;
  return -q.support + q.spacing * (cell + 0.5);
}

namespace {
inline double quantize_real(double v, const ScalarQuantizer& q, QuantStats* stats) {
  if (stats) {
    ++stats->ops;
    if (std::abs(v) > q.support) ++stats->overloads;
  }
  return uniform_level(v, q);
}
}  // namespace

Eigen::VectorXcd quantize_complex_seq(const Eigen::Ref<const Eigen::VectorXcd>& y,
                                      const ScalarQuantizer& q, Rng& rng, bool dither,
                                      QuantStats* stats) {
  Eigen::VectorXcd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double re = y[i].real() + (dither ? rng.uniform_pm(0.5 * q.spacing) : 0.0);
    double im = y[i].imag() + (dither ? rng.uniform_pm(0.5 * q.spacing) : 0.0);
    out[i] = Complex(quantize_real(re, q, stats), quantize_real(im, q, stats));
  }
  return out;
}

void quantize_in_place(Eigen::Ref<Eigen::MatrixXcd> y, const ScalarQuantizer& q, Rng& rng,
                       bool dither, QuantStats* stats) {
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      double re = y(r, c).real() + (dither ? rng.uniform_pm(0.5 * q.spacing) : 0.0);
      double im = y(r, c).imag() + (dither ? rng.uniform_pm(0.5 * q.spacing) : 0.0);
      y(r, c) = Complex(quantize_real(re, q, stats), quantize_real(im, q, stats));
    }
  }
}

}  // namespace tbq
