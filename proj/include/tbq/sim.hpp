#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "tbq/common.hpp"
#include "tbq/dither_quant.hpp"
#include "tbq/mimo_estimators.hpp"
#include "tbq/mimo_model.hpp"

namespace tbq {

enum class Estimator { kMmse, kOpt, kIgn, kHl, kShl, kDigital };

const char* estimator_name(Estimator e);
Estimator estimator_from_name(const std::string& name);

enum class SweepAxis { kRatio, kRate, kPilots, kCsiNoise };

const char* axis_name(SweepAxis a);
SweepAxis axis_from_name(const std::string& name);

/// Full experiment description; parsed from a JSON config (unknown keys are
/// rejected). Defaults mirror the reference evaluation setup.
struct ExperimentConfig {
  MimoScenario scenario;
  SweepAxis axis = SweepAxis::kRate;
  std::vector<double> grid;  // empty selects the default grid for the axis
  int network_draws = 100;
  long mc_trials = 1000;
  int csi_realizations = 40;  // perturbation draws per network (csi-noise axis)
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators;  // empty selects every valid estimator
  double rate = 2.0;
  double ratio = -1.0;  // analog combining ratio; negative selects the per-estimator rule
  double eta = 2.0;
  int threads = 1;
  bool dither = true;
  std::string out = "tbq_out.csv";

  void validate() const;
  std::vector<Estimator> resolved_estimators() const;
  std::vector<double> resolved_grid() const;
  /// Per-estimator combining-ratio rule at a given rate (used when ratio < 0):
  /// general combining uses min(users/pilots, rate/2), spatial combining
  /// min(1, rate/2) for uncorrelated antennas and min(0.8, rate/2) otherwise.
  double ratio_for(Estimator e, double rate_value, const MimoScenario& scn) const;
};

ExperimentConfig default_config();

/// Realized quantization chain simulated by the Monte-Carlo harness.
class QuantChain {
 public:
  virtual ~QuantChain() = default;
  virtual Eigen::MatrixXcd analog(const Eigen::MatrixXcd& y) const = 0;
  virtual Eigen::MatrixXcd digital(const Eigen::MatrixXcd& q) const = 0;
  virtual const ScalarQuantizer& adc() const = 0;
  virtual double predicted_mse() const = 0;
};

template <class Design>
class DesignChain final : public QuantChain {
 public:
  explicit DesignChain(Design d) : d_(std::move(d)) {}
  Eigen::MatrixXcd analog(const Eigen::MatrixXcd& y) const override { return d_.analog(y); }
  Eigen::MatrixXcd digital(const Eigen::MatrixXcd& q) const override { return d_.digital(q); }
  const ScalarQuantizer& adc() const override { return d_.adc; }
  double predicted_mse() const override { return d_.predicted_mse; }
  const Design& design() const { return d_; }

 private:
  Design d_;
};

struct MonteCarloResult {
  double empirical_mse = 0.0;
  double ci_half = 0.0;       // 1.96 sd / sqrt(trials); NaN when trials == 1
  double overload_rate = 0.0;
  long trials = 0;
};

/// Simulates `trials` block-fading draws through analog combining, dithered
/// ADCs and the digital stage, measuring ||G - Ghat||^2 / (antennas * users)
/// against the true channel. Deterministic in (seed); the reduction order is
/// fixed so thread count cannot change results.
MonteCarloResult monte_carlo_mse(const QuantChain& chain, const NetworkRealization& net, int l,
                                 const MimoScenario& scn, long trials, std::uint64_t seed,
                                 bool dither = true, int threads = 1);

struct SweepRow {
  double axis_value = 0.0;
  Estimator estimator = Estimator::kMmse;
  double analytic_mse = 0.0;
  double empirical_mse = 0.0;  // NaN for analytic-only rows
  double ci_half = 0.0;
  double overload_rate = 0.0;
  double wall_ms = 0.0;
};

/// Runs the configured sweep: analytic curves averaged over network draws;
/// the csi-noise axis additionally simulates the realized designs built from
/// perturbed attenuation against the true channels.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

/// Point evaluation with Monte-Carlo validation of the realized designs at
/// the configured (rate, ratio).
std::vector<SweepRow> run_simulate(const ExperimentConfig& cfg);

/// Analytic bounds table at the configured rate.
std::vector<SweepRow> run_bounds(const ExperimentConfig& cfg);

std::string csv_header();
std::string csv_line(const SweepRow& row);
void write_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_gnuplot_script(const std::string& csv_path, const ExperimentConfig& cfg);

}  // namespace tbq
