#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tbq/serialize.hpp"
#include "tbq/sim.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool no_dither = false;
};

void add_common(CLI::App* app, CommonOpts& opts) {
  app->add_option("--config", opts.config_path, "JSON experiment config");
  app->add_option("--out", opts.out, "output path (overrides the config)");
  app->add_option("--seed", opts.seed, "base seed (overrides the config)")
      ->each([&](const std::string&) { opts.seed_set = true; });
  app->add_option("--threads", opts.threads, "worker threads");
  app->add_flag("--no-dither", opts.no_dither, "disable dithering in simulations");
}

tbq::ExperimentConfig make_config(const CommonOpts& opts) {
  tbq::ExperimentConfig cfg =
      opts.config_path.empty() ? tbq::default_config() : tbq::load_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out.empty()) cfg.out = opts.out;
  if (opts.threads > 0) cfg.threads = opts.threads;
  if (opts.no_dither) cfg.dither = false;
  return cfg;
}

void emit(const tbq::ExperimentConfig& cfg, const std::vector<tbq::SweepRow>& rows,
          bool gnuplot) {
  tbq::write_csv(cfg.out, rows);
  if (gnuplot) tbq::write_gnuplot_script(cfg.out, cfg);
  std::cout << "wrote " << rows.size() << " rows to " << cfg.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"task-based quantization designs and massive-MIMO channel-estimation sweeps"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string axis = "rate";
  std::string kind = "hl";
  bool gnuplot = false;

  CLI::App* design = app.add_subcommand("design", "build one quantizer design and emit JSON");
  add_common(design, opts);
  design->add_option("--kind", kind, "hl | spatial")->check(CLI::IsMember({"hl", "spatial"}));

  CLI::App* bounds = app.add_subcommand("bounds", "analytic MSE table at the configured rate");
  add_common(bounds, opts);
  bounds->add_flag("--gnuplot", gnuplot, "also emit a gnuplot script");

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep over the chosen axis");
  add_common(sweep, opts);
  sweep->add_option("--axis", axis, "r | rate | pilots | csi-noise")
      ->check(CLI::IsMember({"r", "rate", "pilots", "csi-noise"}));
  sweep->add_flag("--gnuplot", gnuplot, "also emit a gnuplot script");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte-Carlo validation of the realized designs");
  add_common(simulate, opts);
  simulate->add_flag("--gnuplot", gnuplot, "also emit a gnuplot script");

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed()) {
      tbq::ExperimentConfig cfg = make_config(opts);
      tbq::NetworkRealization net = tbq::generate_network(
          cfg.scenario, tbq::derive_seed(cfg.seed, {0x4e4554ULL, 0}));
      nlohmann::json j;
      if (kind == "hl") {
        double r = cfg.ratio_for(tbq::Estimator::kHl, cfg.rate, cfg.scenario);
        tbq::QuantBudget b = tbq::QuantBudget::make(cfg.rate, r, cfg.scenario.pilots, cfg.eta);
        auto [d, analytic] = tbq::mimo_hl(net, 0, cfg.scenario, b);
        j = tbq::design_to_json(d);
        j["analytic_mse"] = analytic;
      } else {
        double r = cfg.ratio_for(tbq::Estimator::kShl, cfg.rate, cfg.scenario);
        tbq::QuantBudget b = tbq::QuantBudget::make(cfg.rate, r, cfg.scenario.pilots, cfg.eta);
        j = tbq::design_to_json(tbq::spatial_design(net, 0, cfg.scenario, b));
      }
      std::string path = cfg.out == "tbq_out.csv" ? std::string("design.json") : cfg.out;
      std::ofstream out(path);
      out << j.dump(2) << "\n";
      std::cout << "wrote " << path << "\n";
    } else if (bounds->parsed()) {
      tbq::ExperimentConfig cfg = make_config(opts);
      emit(cfg, tbq::run_bounds(cfg), gnuplot);
    } else if (sweep->parsed()) {
      tbq::ExperimentConfig cfg = make_config(opts);
      cfg.axis = tbq::axis_from_name(axis);
      emit(cfg, tbq::run_sweep(cfg), gnuplot);
    } else if (simulate->parsed()) {
      tbq::ExperimentConfig cfg = make_config(opts);
      emit(cfg, tbq::run_simulate(cfg), gnuplot);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
