#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tbq/common.hpp"

namespace tbq {

/// Jakes antenna correlation J0(2 pi spacing |lag|), spacing in wavelengths.
double jakes_correlation(double spacing, long lag);

enum class CorrelationKind { kUncorrelated, kJakes, kExplicit };

/// Scalar correlation sequence a[lag] with a[0] = 1, together with the
/// derived finite-size Toeplitz matrix and PSD grid.
class CorrelationModel {
 public:
  static CorrelationModel uncorrelated();
  static CorrelationModel jakes(double spacing);
  /// Finitely supported sequence c[0], c[1], ...; requires c[0] = 1 and a
  /// nonnegative spectrum.
  static CorrelationModel explicit_sequence(std::vector<double> c);

  CorrelationKind kind() const { return kind_; }
  bool is_uncorrelated() const;
  double spacing() const { return spacing_; }
  const std::vector<double>& sequence() const { return seq_; }

  double at(long lag) const;

  /// n x n Toeplitz correlation matrix.
  Eigen::MatrixXd toeplitz(int n) const;

  /// PSD samples on a uniform grid of [0, 2pi). Cell averages for the Jakes
  /// spectrum (which has integrable band-edge singularities), point samples
  /// otherwise. The grid mean is exactly a[0] = 1 either way. Uncorrelated
  /// models return the one-point grid {1}, which is exact.
  Eigen::VectorXd psd_grid(int n_points = kDefaultPsdGrid) const;

 private:
  CorrelationKind kind_ = CorrelationKind::kUncorrelated;
  double spacing_ = 0.0;
  std::vector<double> seq_;
};

}  // namespace tbq
