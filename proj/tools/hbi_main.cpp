// hbi: deconvolution benchmark, MAP solves, posterior chains and reports.

#include "hbi/error.hpp"
#include "hbi/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Options {
  std::string config;
  std::string run;
  std::string output;
  std::uint64_t seed = 0;
};

hbi::ExperimentConfig prepare(const Options& opt, const CLI::App& sub) {
  hbi::ExperimentConfig cfg = hbi::load_config(opt.config);
  if (!opt.output.empty()) cfg.output_dir = opt.output;
  std::optional<std::string> run;
  if (!opt.run.empty()) run = opt.run;
  if (sub.count("--seed-override")) hbi::apply_seed_override(cfg, opt.seed, run);
  return cfg;
}

std::vector<std::string> selected_runs(const hbi::ExperimentConfig& cfg, const Options& opt) {
  if (!opt.run.empty()) return {cfg.run(opt.run).id};
  std::vector<std::string> ids;
  for (const auto& r : cfg.runs) ids.push_back(r.id);
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical Bayesian sparse deconvolution: IAS MAP estimates and pCN posterior sampling"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_run) {
    sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
    sub->add_option("--output", opt.output, "output directory (overrides output_dir)");
    sub->add_option("--seed-override", opt.seed, "replace chain seeds (run seed, or seed + index for all runs)");
    if (with_run) sub->add_option("--run", opt.run, "run id (default: every run in the config)");
  };
  CLI::App* gen = app.add_subcommand("generate", "build the benchmark problem");
  CLI::App* map = app.add_subcommand("map", "hybrid IAS MAP estimate for each run's r");
  CLI::App* sample = app.add_subcommand("sample", "run the MCMC chains");
  CLI::App* diag = app.add_subcommand("diagnose", "autocorrelations, envelopes, compressibility");
  CLI::App* all = app.add_subcommand("all", "generate, map, sample and diagnose");
  add_common(gen, false);
  add_common(map, true);
  add_common(sample, true);
  add_common(diag, true);
  add_common(all, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::ostream& log = std::cerr;
    if (gen->parsed()) {
      hbi::cmd_generate(prepare(opt, *gen), log);
    } else if (map->parsed()) {
      const auto cfg = prepare(opt, *map);
      std::vector<double> targets;
      if (!opt.run.empty())
        targets.push_back(cfg.run(opt.run).r);
      else
        targets = cfg.map_targets();
      bool ok = true;
      for (double r : targets) ok = hbi::cmd_map(cfg, r, log) && ok;
      if (!ok) return 3;
    } else if (sample->parsed()) {
      const auto cfg = prepare(opt, *sample);
      for (const auto& id : selected_runs(cfg, opt)) hbi::cmd_sample(cfg, id, log);
    } else if (diag->parsed()) {
      const auto cfg = prepare(opt, *diag);
      for (const auto& id : selected_runs(cfg, opt)) hbi::cmd_diagnose(cfg, id, log);
    } else if (all->parsed()) {
      if (!hbi::cmd_all(prepare(opt, *all), log)) return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "hbi: error: " << e.what() << '\n';
    return hbi::exit_code_for(e);
  }
  return 0;
}
