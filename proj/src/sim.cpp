#include "tbq/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

namespace tbq {

namespace {

constexpr std::uint64_t kNetTag = 0x4e4554ULL;   // network draws
constexpr std::uint64_t kCsiTag = 0x435349ULL;   // attenuation perturbations
constexpr std::uint64_t kMcTag = 0x4d43ULL;      // Monte-Carlo trials

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t estimator_tag(Estimator e) { return 0x45535400ULL + std::uint64_t(e); }

void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

double network_mmse(const NetworkRealization& net, int l, const MimoScenario& scn) {
  BPhi bp = b_phi_coeffs(net, l, scn);
  double acc = 0.0;
  for (int u = 0; u < scn.users; ++u)
    acc += net.d(l, l)[u] * net.d(l, l)[u] - bp.phi[u] * bp.phi[u];
  return acc / scn.users;
}

}  // namespace

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kMmse: return "mmse";
    case Estimator::kOpt: return "opt";
    case Estimator::kIgn: return "ign";
    case Estimator::kHl: return "hl";
    case Estimator::kShl: return "shl";
    case Estimator::kDigital: return "digital";
  }
  return "?";
}

Estimator estimator_from_name(const std::string& name) {
  for (Estimator e : {Estimator::kMmse, Estimator::kOpt, Estimator::kIgn, Estimator::kHl,
                      Estimator::kShl, Estimator::kDigital})
    if (name == estimator_name(e)) return e;
  throw std::invalid_argument("unknown estimator: " + name);
}

const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kRatio: return "r";
    case SweepAxis::kRate: return "rate";
    case SweepAxis::kPilots: return "pilots";
    case SweepAxis::kCsiNoise: return "csi-noise";
  }
  return "?";
}

SweepAxis axis_from_name(const std::string& name) {
  for (SweepAxis a :
       {SweepAxis::kRatio, SweepAxis::kRate, SweepAxis::kPilots, SweepAxis::kCsiNoise})
    if (name == axis_name(a)) return a;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

void ExperimentConfig::validate() const {
  scenario.validate();
  if (network_draws < 1) throw std::invalid_argument("config: network_draws must be >= 1");
  if (mc_trials < 1) throw std::invalid_argument("config: mc_trials must be >= 1");
  if (csi_realizations < 1) throw std::invalid_argument("config: csi_realizations must be >= 1");
  if (!(rate > 0.0)) throw std::invalid_argument("config: rate must be positive");
  if (ratio > 1.0) throw std::invalid_argument("config: ratio must lie in (0, 1]");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  std::vector<double> g = resolved_grid();
  if (g.empty()) throw std::invalid_argument("config: empty sweep grid");
  if (!std::is_sorted(g.begin(), g.end()))
    throw std::invalid_argument("config: sweep grid must be sorted");
  for (Estimator e : resolved_estimators()) {
    if (e == Estimator::kIgn && !scenario.correlation.is_uncorrelated())
      throw std::invalid_argument(
          "config: the task-ignorant bound requires uncorrelated antennas");
    if (axis == SweepAxis::kCsiNoise && e != Estimator::kHl && e != Estimator::kShl &&
        e != Estimator::kDigital)
      throw std::invalid_argument(
          "config: the csi-noise sweep simulates realized designs; only hl, shl and digital "
          "are valid");
  }
}

std::vector<Estimator> ExperimentConfig::resolved_estimators() const {
  if (!estimators.empty()) return estimators;
  std::vector<Estimator> all;
  if (axis == SweepAxis::kCsiNoise) {
    all = {Estimator::kHl, Estimator::kShl, Estimator::kDigital};
  } else {
    all = {Estimator::kMmse, Estimator::kOpt, Estimator::kIgn, Estimator::kHl, Estimator::kShl,
           Estimator::kDigital};
    if (!scenario.correlation.is_uncorrelated())
      all.erase(std::find(all.begin(), all.end(), Estimator::kIgn));
  }
  return all;
}

std::vector<double> ExperimentConfig::resolved_grid() const {
  if (!grid.empty()) return grid;
  auto range = [](double lo, double step, double hi) {
    std::vector<double> g;
    for (int k = 0;; ++k) {
      double v = lo + k * step;
      if (v > hi + 1e-9) break;
      g.push_back(std::min(v, hi));
    }
    return g;
  };
  switch (axis) {
    case SweepAxis::kRate:
      return range(0.5, 0.25, 8.0);
    case SweepAxis::kRatio:
      return range(0.05, 0.05, 1.0);
    case SweepAxis::kPilots:
      return range(10.0, 10.0, 100.0);
    case SweepAxis::kCsiNoise:
      return range(0.0, 0.02, 0.2);
  }
  return {};
}

double ExperimentConfig::ratio_for(Estimator e, double rate_value, const MimoScenario& scn) const {
  if (ratio > 0.0) return ratio;
  double cap = rate_value / 2.0;
  switch (e) {
    case Estimator::kHl:
      return std::min(double(scn.users) / scn.pilots, cap);
    case Estimator::kShl:
      return std::min(scn.correlation.is_uncorrelated() ? 1.0 : 0.8, cap);
    default:
      return 1.0;
  }
}

MonteCarloResult monte_carlo_mse(const QuantChain& chain, const NetworkRealization& net, int l,
                                 const MimoScenario& scn, long trials, std::uint64_t seed,
                                 bool dither, int threads) {
  if (trials < 1) throw std::invalid_argument("monte_carlo_mse: trials must be >= 1");
  std::vector<double> errs(trials);
  std::vector<QuantStats> stats(trials);
  const double denom = double(scn.antennas) * double(scn.users);
  parallel_for(trials, threads, [&](long t) {
    Rng rng(derive_seed(seed, {kMcTag, std::uint64_t(t)}));
    ChannelDraw draw = simulate_channel_outputs(net, l, scn, rng);
    Eigen::MatrixXcd pre = chain.analog(draw.y);
    quantize_in_place(pre, chain.adc(), rng, dither, &stats[t]);
    errs[t] = (draw.g - chain.digital(pre)).squaredNorm() / denom;
  });

  MonteCarloResult out;
  out.trials = trials;
  double mean = 0.0;
  for (long t = 0; t < trials; ++t) mean += errs[t];
  mean /= trials;
  out.empirical_mse = mean;
  if (trials > 1) {
    double ss = 0.0;
    for (long t = 0; t < trials; ++t) ss += (errs[t] - mean) * (errs[t] - mean);
    out.ci_half = 1.96 * std::sqrt(ss / (trials - 1)) / std::sqrt(double(trials));
  } else {
    out.ci_half = kNan;
  }
  long long ovl = 0, ops = 0;
  for (const QuantStats& s : stats) {
    ovl += s.overloads;
    ops += s.ops;
  }
  out.overload_rate = ops > 0 ? double(ovl) / double(ops) : 0.0;
  return out;
}

namespace {

// Analytic value of one estimator for one network; NaN when the analytic
// formula does not cover the configuration (correlated pq below rank).
double analytic_value(Estimator e, const NetworkRealization& net, const MimoScenario& scn,
                      const ExperimentConfig& cfg, double rate_value, double ratio_value) {
  switch (e) {
    case Estimator::kMmse:
      return network_mmse(net, 0, scn);
    case Estimator::kOpt:
      return mimo_mse_opt(net, 0, scn, rate_value);
    case Estimator::kIgn:
      return mimo_mse_ign(net, 0, scn, rate_value);
    case Estimator::kHl: {
      QuantBudget b = QuantBudget::make(rate_value, ratio_value, scn.pilots, cfg.eta);
      try {
        return mimo_hl_mse(net, 0, scn, b);
      } catch (const std::invalid_argument&) {
        if (scn.correlation.is_uncorrelated()) throw;
        return kNan;  // below-rank correlated case has no closed form
      }
    }
    case Estimator::kShl: {
      QuantBudget b = QuantBudget::make(rate_value, ratio_value, scn.pilots, cfg.eta);
      if (scn.correlation.is_uncorrelated()) return spatial_mse_iid(net, 0, scn, b);
      return spatial_design(net, 0, scn, b).predicted_mse;
    }
    case Estimator::kDigital:
      return digital_only_mse(net, 0, scn, rate_value, scn.antennas);
  }
  return kNan;
}

std::unique_ptr<QuantChain> build_chain(Estimator e, const NetworkRealization& net,
                                        const MimoScenario& scn, const ExperimentConfig& cfg,
                                        double rate_value) {
  double r = cfg.ratio_for(e, rate_value, scn);
  switch (e) {
    case Estimator::kHl: {
      QuantBudget b = QuantBudget::make(rate_value, r, scn.pilots, cfg.eta);
      return std::make_unique<DesignChain<HLDesign>>(
          design_hl(mimo_task_model(net, 0, scn), b, scn.antennas));
    }
    case Estimator::kShl: {
      QuantBudget b = QuantBudget::make(rate_value, r, scn.pilots, cfg.eta);
      return std::make_unique<DesignChain<SpatialDesign>>(spatial_design(net, 0, scn, b));
    }
    case Estimator::kDigital:
      return std::make_unique<DesignChain<DigitalOnlyDesign>>(
          digital_only_design(net, 0, scn, rate_value));
    default:
      throw std::invalid_argument("build_chain: estimator has no realizable design");
  }
}

std::vector<NetworkRealization> draw_networks(const ExperimentConfig& cfg,
                                              const MimoScenario& scn) {
  std::vector<NetworkRealization> nets;
  nets.reserve(cfg.network_draws);
  for (int i = 0; i < cfg.network_draws; ++i)
    nets.push_back(generate_network(scn, derive_seed(cfg.seed, {kNetTag, std::uint64_t(i)})));
  return nets;
}

NetworkRealization perturb_network(const NetworkRealization& net, double sigma_d, Rng& rng) {
  NetworkRealization out = net;
  for (int l = 0; l < net.cells; ++l)
    for (int m = 0; m < net.cells; ++m)
      for (int u = 0; u < net.users; ++u) out.d(l, m)[u] += sigma_d * rng.normal();
  return out;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = cfg.resolved_grid();
  const std::vector<Estimator> ests = cfg.resolved_estimators();
  std::vector<SweepRow> rows;

  if (cfg.axis == SweepAxis::kCsiNoise) {
    const MimoScenario& scn = cfg.scenario;
    std::vector<NetworkRealization> nets = draw_networks(cfg, scn);
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      double sigma_d = std::sqrt(grid[gi]);
      for (Estimator e : ests) {
        double t0 = now_ms();
        long cells = long(nets.size()) * cfg.csi_realizations;
        std::vector<double> pred(cells), emp(cells), ovl(cells);
        parallel_for(cells, cfg.threads, [&](long idx) {
          long ni = idx / cfg.csi_realizations;
          long wi = idx % cfg.csi_realizations;
          Rng rng(derive_seed(cfg.seed, {kCsiTag, std::uint64_t(gi), std::uint64_t(ni),
                                         std::uint64_t(wi)}));
          NetworkRealization noisy = perturb_network(nets[ni], sigma_d, rng);
          std::unique_ptr<QuantChain> chain = build_chain(e, noisy, scn, cfg, cfg.rate);
          MonteCarloResult mc = monte_carlo_mse(
              *chain, nets[ni], 0, scn, cfg.mc_trials,
              derive_seed(cfg.seed, {kMcTag, std::uint64_t(gi), std::uint64_t(ni),
                                     std::uint64_t(wi), estimator_tag(e)}),
              cfg.dither, 1);
          pred[idx] = chain->predicted_mse();
          emp[idx] = mc.empirical_mse;
          ovl[idx] = mc.overload_rate;
        });
        SweepRow row;
        row.axis_value = grid[gi];
        row.estimator = e;
        row.analytic_mse = 0.0;
        row.empirical_mse = 0.0;
        row.overload_rate = 0.0;
        for (long i = 0; i < cells; ++i) {
          row.analytic_mse += pred[i];
          row.empirical_mse += emp[i];
          row.overload_rate += ovl[i];
        }
        row.analytic_mse /= cells;
        row.empirical_mse /= cells;
        row.overload_rate /= cells;
        // Spread of the per-design empirical means, not a per-trial CI.
        double ss = 0.0;
        for (long i = 0; i < cells; ++i)
          ss += (emp[i] - row.empirical_mse) * (emp[i] - row.empirical_mse);
        row.ci_half = cells > 1 ? 1.96 * std::sqrt(ss / (cells - 1)) / std::sqrt(double(cells))
                                : kNan;
        row.wall_ms = now_ms() - t0;
        rows.push_back(row);
      }
    }
    return rows;
  }

  std::vector<NetworkRealization> nets = draw_networks(cfg, cfg.scenario);
  for (double v : grid) {
    MimoScenario scn = cfg.scenario;
    double rate_value = cfg.rate;
    if (cfg.axis == SweepAxis::kRate) rate_value = v;
    if (cfg.axis == SweepAxis::kPilots) {
      scn.pilots = int(std::lround(v));
      if (scn.pilots < scn.users)
        throw std::invalid_argument("run_sweep: pilots grid value below the user count");
    }
    for (Estimator e : ests) {
      double t0 = now_ms();
      double ratio_value =
          cfg.axis == SweepAxis::kRatio ? v : cfg.ratio_for(e, rate_value, scn);
      std::vector<double> vals(nets.size());
      parallel_for(long(nets.size()), cfg.threads, [&](long i) {
        vals[i] = analytic_value(e, nets[i], scn, cfg, rate_value, ratio_value);
      });
      SweepRow row;
      row.axis_value = v;
      row.estimator = e;
      double acc = 0.0;
      bool nan = false;
      for (double x : vals) {
        if (std::isnan(x)) nan = true;
        acc += x;
      }
      row.analytic_mse = nan ? kNan : acc / double(nets.size());
      row.empirical_mse = kNan;
      row.ci_half = kNan;
      row.overload_rate = kNan;
      row.wall_ms = now_ms() - t0;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SweepRow> run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const MimoScenario& scn = cfg.scenario;
  std::vector<NetworkRealization> nets = draw_networks(cfg, scn);
  std::vector<SweepRow> rows;
  for (Estimator e : cfg.resolved_estimators()) {
    if (e == Estimator::kOpt || e == Estimator::kIgn) {
      // Vector-quantizer bounds have no realizable chain; report analytic only.
      double t0 = now_ms();
      double acc = 0.0;
      for (const NetworkRealization& net : nets)
        acc += analytic_value(e, net, scn, cfg, cfg.rate, cfg.ratio_for(e, cfg.rate, scn));
      SweepRow row{cfg.rate, e, acc / nets.size(), kNan, kNan, kNan, now_ms() - t0};
      rows.push_back(row);
      continue;
    }
    double t0 = now_ms();
    long count = long(nets.size());
    std::vector<double> ana(count), emp(count), ci(count), ovl(count);
    parallel_for(count, cfg.threads, [&](long i) {
      if (e == Estimator::kMmse) {
        // Unquantized MMSE estimator, simulated directly.
        ana[i] = network_mmse(nets[i], 0, scn);
        double acc = 0.0, accsq = 0.0;
        for (long t = 0; t < cfg.mc_trials; ++t) {
          Rng rng(derive_seed(cfg.seed, {kMcTag, std::uint64_t(i), std::uint64_t(t),
                                         estimator_tag(e)}));
          ChannelDraw draw = simulate_channel_outputs(nets[i], 0, scn, rng);
          Eigen::MatrixXcd est = mmse_channel_estimate(draw.y, nets[i], 0, scn);
          double err = (draw.g - est).squaredNorm() / (double(scn.antennas) * scn.users);
          acc += err;
          accsq += err * err;
        }
        emp[i] = acc / cfg.mc_trials;
        double var = (accsq - cfg.mc_trials * emp[i] * emp[i]) / std::max<long>(1, cfg.mc_trials - 1);
        ci[i] = cfg.mc_trials > 1 ? 1.96 * std::sqrt(std::max(0.0, var) / cfg.mc_trials) : kNan;
        ovl[i] = 0.0;
        return;
      }
      std::unique_ptr<QuantChain> chain = build_chain(e, nets[i], scn, cfg, cfg.rate);
      ana[i] = chain->predicted_mse();
      MonteCarloResult mc =
          monte_carlo_mse(*chain, nets[i], 0, scn, cfg.mc_trials,
                          derive_seed(cfg.seed, {kMcTag, std::uint64_t(i), estimator_tag(e)}),
                          cfg.dither, 1);
      emp[i] = mc.empirical_mse;
      ci[i] = mc.ci_half;
      ovl[i] = mc.overload_rate;
    });
    SweepRow row;
    row.axis_value = cfg.rate;
    row.estimator = e;
    row.analytic_mse = 0.0;
    row.empirical_mse = 0.0;
    row.overload_rate = 0.0;
    double cisum = 0.0;
    for (long i = 0; i < count; ++i) {
      row.analytic_mse += ana[i];
      row.empirical_mse += emp[i];
      row.overload_rate += ovl[i];
      cisum += ci[i] * ci[i];
    }
    row.analytic_mse /= count;
    row.empirical_mse /= count;
    row.overload_rate /= count;
    row.ci_half = std::sqrt(cisum) / count;
    row.wall_ms = now_ms() - t0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> run_bounds(const ExperimentConfig& cfg) {
  cfg.validate();
  const MimoScenario& scn = cfg.scenario;
  std::vector<NetworkRealization> nets = draw_networks(cfg, scn);
  std::vector<SweepRow> rows;
  for (Estimator e : cfg.resolved_estimators()) {
    double t0 = now_ms();
    double acc = 0.0;
    bool nan = false;
    for (const NetworkRealization& net : nets) {
      double x = analytic_value(e, net, scn, cfg, cfg.rate, cfg.ratio_for(e, cfg.rate, scn));
      if (std::isnan(x)) nan = true;
      acc += x;
    }
    SweepRow row{cfg.rate, e, nan ? kNan : acc / nets.size(), kNan, kNan, kNan, now_ms() - t0};
    rows.push_back(row);
  }
  return rows;
}

namespace {
std::string fmt9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace

std::string csv_header() {
  return "axis,estimator,analytic_mse,empirical_mse,ci_half,overload_rate,wall_ms";
}

std::string csv_line(const SweepRow& row) {
  std::string s = fmt9(row.axis_value);
  s += ',';
  s += estimator_name(row.estimator);
  s += ',';
  s += fmt9(row.analytic_mse);
  s += ',';
  s += fmt9(row.empirical_mse);
  s += ',';
  s += fmt9(row.ci_half);
  s += ',';
  s += fmt9(row.overload_rate);
  s += ',';
  s += fmt9(row.wall_ms);
  return s;
}

void write_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << csv_header() << '\n';
  for (const SweepRow& row : rows) out << csv_line(row) << '\n';
}

void write_gnuplot_script(const std::string& csv_path, const ExperimentConfig& cfg) {
  std::ofstream out(csv_path + ".gp");
  if (!out) throw std::runtime_error("write_gnuplot_script: cannot open " + csv_path + ".gp");
  out << "set datafile separator ','\n";
  out << "set key outside\n";
  out << "set logscale y\n";
  out << "set xlabel '" << axis_name(cfg.axis) << "'\n";
  out << "set ylabel 'average MSE'\n";
  out << "plot ";
  bool first = true;
  for (Estimator e : cfg.resolved_estimators()) {
    if (!first) out << ", \\\n     ";
    first = false;
    out << "'" << csv_path << "' using 1:(stringcolumn(2) eq '" << estimator_name(e)
        << "' ? $3 : 1/0) with linespoints title '" << estimator_name(e) << "'";
  }
  out << "\n";
}

}  // namespace tbq
