#pragma once
// Experiment orchestration behind the `hbi` command line tool: problem
// generation, MAP solves, chains and reports, all as files under one output
// directory:
//
//   <out>/problem/{manifest.json, A_hat.csv, b_hat.csv}
//   <out>/map/<r>/{map.json, map.csv}
//   <out>/chains/<run>/{samples.csv, meta.json, physical.csv}
//   <out>/reports/<run>/{report.json, envelopes.csv, autocorr.csv,
//                         compressibility.csv, pairs.csv}

#include "hbi/diagnostics.hpp"
#include "hbi/forward.hpp"
#include "hbi/hypermodel.hpp"
#include "hbi/ias.hpp"
#include "hbi/sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hbi {

struct RunSpec {
  std::string id;
  double r = 1.0;
  ChainConfig chain;
};

struct ExperimentConfig {
  DeconvolutionConfig problem;
  double beta1 = 1.501;
  double vartheta1 = 0.05;
  double ias_tol = 0.005;
  int ias_max_iter = 500;
  ReportOptions report;
  std::vector<RunSpec> runs;
  std::filesystem::path output_dir = "out";

  // ConfigError naming the field.
  void validate() const;
  const RunSpec& run(const std::string& id) const;
  // Distinct r values in run order.
  std::vector<double> map_targets() const;
};

// Unknown keys and type mismatches are ConfigErrors naming the field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json problem_to_json(const DeconvolutionConfig& cfg);
DeconvolutionConfig problem_from_json(const nlohmann::json& doc, const std::string& where);

// Reference model for r = 1, matched model otherwise.
Hypermodel hypermodel_for(double r, const ExperimentConfig& cfg);

// Directory name for a given r ("1", "0.5", "-1", ...).
std::string r_label(double r);

// With a run id the override replaces that run's seed; without one, run i
// (0-based) gets seed + i.
void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed,
                         const std::optional<std::string>& run_id);

struct Paths {
  std::filesystem::path root;

  std::filesystem::path problem() const { return root / "problem"; }
  std::filesystem::path map(double r) const { return root / "map" / r_label(r); }
  std::filesystem::path chain(const std::string& id) const { return root / "chains" / id; }
  std::filesystem::path report(const std::string& id) const { return root / "reports" / id; }
};

// Loads the stored problem and checks it against the config.
InverseProblem load_problem(const ExperimentConfig& cfg);

struct MapArtifact {
  Vector xi;
  Vector lambda;
  bool converged = false;
};
MapArtifact load_map(const ExperimentConfig& cfg, double r);

struct ChainArtifact {
  SampleSet samples;
  double r = 1.0;
};
ChainArtifact load_chain(const ExperimentConfig& cfg, const std::string& run_id);

// Each command logs progress lines to `log`.  cmd_map returns false when IAS
// did not converge (the artifact is still written).
void cmd_generate(const ExperimentConfig& cfg, std::ostream& log);
bool cmd_map(const ExperimentConfig& cfg, double r, std::ostream& log);
void cmd_sample(const ExperimentConfig& cfg, const std::string& run_id, std::ostream& log);
void cmd_diagnose(const ExperimentConfig& cfg, const std::string& run_id, std::ostream& log);
// generate, every map target, then sample and diagnose every run.
// False if some MAP solve failed to converge (the pipeline stops there).
bool cmd_all(const ExperimentConfig& cfg, std::ostream& log);

// 2 for validation errors, 3 for numerical failures, 4 for I/O, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace hbi
