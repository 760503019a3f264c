#pragma once

#include <Eigen/Dense>

#include "tbq/common.hpp"
#include "tbq/rng.hpp"

namespace tbq {

/// kappa = eta^2 (1 - 2 eta^2 / (3 M^2))^-1. Requires eta < sqrt(3/2) M so the
/// value is strictly positive. `levels` is integer-valued but carried as a
/// double so that extreme resolutions (tiny combining ratios) do not overflow.
double kappa(double eta, double levels);

/// Uniform mid-rise quantizer with support gamma and M levels of spacing
/// 2 gamma / M. Inputs beyond the support clamp to the outermost level.
struct ScalarQuantizer {
  double support;  // gamma
  int levels;      // M
  double spacing;  // 2 gamma / M
  double eta;      // support factor gamma / (max input std)

  ScalarQuantizer(double support_, int levels_, double eta_ = 2.0);
};

/// Per-complex-sample variance of the quantization-plus-dither error,
/// 4 gamma^2 / (3 M^2).
double noise_model_variance(const ScalarQuantizer& q);

/// Level of the cell containing x; sign(x) (gamma - spacing/2) on overload.
double uniform_level(double x, const ScalarQuantizer& q);

struct QuantStats {
  long long overloads = 0;
  long long ops = 0;  // one op per quantized real dimension
  double overload_rate() const { return ops > 0 ? double(overloads) / double(ops) : 0.0; }
};

/// Non-subtractive dithered quantization of a complex sequence: each real
/// dimension gets an independent uniform dither on [-spacing/2, spacing/2]
/// before uniform_level; the dither is not subtracted afterwards.
Eigen::VectorXcd quantize_complex_seq(const Eigen::Ref<const Eigen::VectorXcd>& y,
                                      const ScalarQuantizer& q, Rng& rng,
                                      bool dither = true, QuantStats* stats = nullptr);

/// In-place variant for matrices (iterates column-major).
void quantize_in_place(Eigen::Ref<Eigen::MatrixXcd> y, const ScalarQuantizer& q, Rng& rng,
                       bool dither = true, QuantStats* stats = nullptr);

}  // namespace tbq
