#include "hbi/experiment.hpp"

#include "hbi/error.hpp"
#include "hbi/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <type_traits>

namespace hbi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads the fields of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  bool get(const std::string& key, T& out) {
    used_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return false;
    out = convert<T>(*it, path(key));
    return true;
  }

  template <class T>
  void require(const std::string& key, T& out) {
    if (!get(key, out)) throw ConfigError(path(key) + ": missing required field");
  }

  const json* child(const std::string& key) {
    used_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!used_.count(item.key())) throw ConfigError(path(item.key()) + ": unknown field");
    }
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  template <class T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
          throw ConfigError(where + ": expected a non-negative integer");
        return v.get<T>();
      } else {
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
          throw ConfigError(where + ": integer out of range");
        return static_cast<T>(x);
      }
    } else {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
      return v.get<T>();
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

std::string indexed(const std::string& where, std::size_t i) {
  return where + "[" + std::to_string(i) + "]";
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json hypermodel_json(const Hypermodel& hm) {
  return {{"r", hm.r()}, {"beta", hm.beta()}, {"vartheta", hm.vartheta(0)}};
}

json ias_json(const IASResult& res) {
  std::vector<double> energy;
  std::vector<double> change;
  for (const auto& s : res.trace) {
    energy.push_back(s.energy);
    change.push_back(s.theta_change);
  }
  return {{"iterations", res.iterations()},
          {"converged", res.converged},
          {"energy", energy},
          {"theta_change", change}};
}

void require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw IoError(path.string() + ": not found; " + hint);
}

bool valid_run_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

// Errors from lower layers re-raised with the config field that caused them.
template <class F>
void with_context(const std::string& where, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

nlohmann::json problem_to_json(const DeconvolutionConfig& cfg) {
  json jumps = json::array();
  for (const auto& j : cfg.signal_jumps) jumps.push_back({{"location", j.location}, {"increment", j.increment}});
  return {{"kernel_width", cfg.kernel_width}, {"kernel_amplitude", cfg.kernel_amplitude},
          {"n", cfg.n},                       {"obs_stride", cfg.obs_stride},
          {"m", cfg.m},                       {"fine_n", cfg.fine_n},
          {"sigma", cfg.sigma},               {"seed", cfg.rng_seed},
          {"jumps", jumps}};
}

DeconvolutionConfig problem_from_json(const nlohmann::json& doc, const std::string& where) {
  DeconvolutionConfig cfg;
  Fields f(doc, where);
  f.get("kernel_width", cfg.kernel_width);
  f.get("kernel_amplitude", cfg.kernel_amplitude);
  f.get("n", cfg.n);
  f.get("obs_stride", cfg.obs_stride);
  f.get("m", cfg.m);
  f.get("fine_n", cfg.fine_n);
  f.get("sigma", cfg.sigma);
  f.get("seed", cfg.rng_seed);
  if (const json* jumps = f.child("jumps")) {
    const std::string jw = f.path("jumps");
    if (!jumps->is_array()) throw ConfigError(jw + ": expected an array");
    cfg.signal_jumps.clear();
    for (std::size_t i = 0; i < jumps->size(); ++i) {
      Jump jump{};
      Fields jf((*jumps)[i], indexed(jw, i));
      jf.require("location", jump.location);
      jf.require("increment", jump.increment);
      jf.finish();
      cfg.signal_jumps.push_back(jump);
    }
  }
  f.finish();
  with_context(where, [&] { cfg.validate(); });
  return cfg;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig cfg;
  Fields f(doc, "config");
  std::string out_dir;
  if (f.get("output_dir", out_dir)) cfg.output_dir = out_dir;
  if (const json* p = f.child("problem")) cfg.problem = problem_from_json(*p, f.path("problem"));
  if (const json* ref = f.child("reference")) {
    Fields rf(*ref, f.path("reference"));
    rf.get("beta1", cfg.beta1);
    rf.get("vartheta1", cfg.vartheta1);
    rf.finish();
  }
  if (const json* ias = f.child("ias")) {
    Fields af(*ias, f.path("ias"));
    af.get("tol", cfg.ias_tol);
    af.get("max_iter", cfg.ias_max_iter);
    af.finish();
  }
  if (const json* diag = f.child("diagnostics")) {
    Fields df(*diag, f.path("diagnostics"));
    df.get("lags", cfg.report.max_lag);
    df.get("level", cfg.report.level);
    if (const json* probes = df.child("probes")) {
      const std::string pw = df.path("probes");
      if (!probes->is_array()) throw ConfigError(pw + ": expected an array of indices");
      cfg.report.probes.clear();
      for (std::size_t i = 0; i < probes->size(); ++i)
        cfg.report.probes.push_back(Fields::convert<int>((*probes)[i], indexed(pw, i)));
    }
    df.finish();
  }
  if (const json* runs = f.child("runs")) {
    const std::string rw = f.path("runs");
    if (!runs->is_array()) throw ConfigError(rw + ": expected an array");
    for (std::size_t i = 0; i < runs->size(); ++i) {
      RunSpec run;
      run.id = "run" + std::to_string(i + 1);
      run.chain.seed = i + 1;
      Fields rf((*runs)[i], indexed(rw, i));
      rf.get("id", run.id);
      rf.require("r", run.r);
      std::string kernel = std::string(kernel_name(run.chain.kernel));
      if (rf.get("kernel", kernel)) {
        with_context(rf.path("kernel"), [&] { run.chain.kernel = parse_kernel(kernel); });
      }
      rf.get("h", run.chain.h);
      rf.get("k", run.chain.k);
      rf.get("total_steps", run.chain.total_steps);
      rf.get("thin", run.chain.thin);
      rf.get("seed", run.chain.seed);
      rf.finish();
      cfg.runs.push_back(std::move(run));
    }
  }
  f.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  require_file(path, "pass an existing file with --config");
  try {
    return parse_config(io::read_json(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ExperimentConfig::validate() const {
  with_context("config.problem", [&] { problem.validate(); });
  if (!(beta1 > 0.0) || !std::isfinite(beta1)) throw ConfigError("config.reference.beta1: must be positive");
  if (!(vartheta1 > 0.0) || !std::isfinite(vartheta1))
    throw ConfigError("config.reference.vartheta1: must be positive");
  if (!(ias_tol > 0.0)) throw ConfigError("config.ias.tol: must be positive");
  if (ias_max_iter < 1) throw ConfigError("config.ias.max_iter: must be at least 1");
  if (report.max_lag < 0) throw ConfigError("config.diagnostics.lags: must be non-negative");
  if (!(report.level >= 0.0 && report.level < 1.0))
    throw ConfigError("config.diagnostics.level: must lie in [0, 1)");
  for (std::size_t i = 0; i < report.probes.size(); ++i) {
    const int p = report.probes[i];
    if (p < 1 || p > problem.n)
      throw ConfigError(indexed("config.diagnostics.probes", i) + ": index " + std::to_string(p) +
                        " outside 1.." + std::to_string(problem.n));
  }
  std::set<std::string> ids;
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunSpec& run = runs[i];
    const std::string where = indexed("config.runs", i);
    if (!valid_run_id(run.id))
      throw ConfigError(where + ".id: '" + run.id + "' must be non-empty and use only [A-Za-z0-9_.-]");
    if (!ids.insert(run.id).second) throw ConfigError(where + ".id: duplicate run id '" + run.id + "'");
    if (!seeds.insert(run.chain.seed).second)
      throw ConfigError(where + ".seed: seed " + std::to_string(run.chain.seed) +
                        " already used by another run");
    if (run.r == 0.0 || !std::isfinite(run.r)) throw ConfigError(where + ".r: must be finite and nonzero");
    with_context(where, [&] { run.chain.validate(); });
    with_context(where + ".r", [&] { hypermodel_for(run.r, *this).require_map_compatible(); });
  }
}

const RunSpec& ExperimentConfig::run(const std::string& id) const {
  for (const auto& r : runs) {
    if (r.id == id) return r;
  }
  std::string known;
  for (const auto& r : runs) known += (known.empty() ? "" : ", ") + r.id;
  throw ConfigError("unknown run '" + id + "' (config defines: " + (known.empty() ? "none" : known) + ")");
}

std::vector<double> ExperimentConfig::map_targets() const {
  std::vector<double> out;
  for (const auto& r : runs) {
    if (std::find(out.begin(), out.end(), r.r) == out.end()) out.push_back(r.r);
  }
  return out;
}

Hypermodel hypermodel_for(double r, const ExperimentConfig& cfg) {
  if (r == 1.0) return Hypermodel(1.0, cfg.beta1, cfg.vartheta1);
  return match_hyperparameters(r, cfg.beta1, cfg.vartheta1);
}

std::string r_label(double r) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, r);
  return std::string(buf, res.ptr);
}

void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed, const std::optional<std::string>& run_id) {
  if (run_id) {
    const RunSpec& target = cfg.run(*run_id);
    for (auto& r : cfg.runs) {
      if (&r == &target) r.chain.seed = seed;
    }
  } else {
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) cfg.runs[i].chain.seed = seed + i;
  }
  cfg.validate();
}

InverseProblem load_problem(const ExperimentConfig& cfg) {
  const Paths paths{cfg.output_dir};
  const fs::path manifest_path = paths.problem() / "manifest.json";
  require_file(manifest_path, "run `hbi generate` first");
  const json manifest = io::read_json(manifest_path);
  const std::string where = manifest_path.string();
  if (!manifest.is_object()) throw ConfigError(where + ": expected an object");
  const auto field = [&](const char* key) -> const json& {
    const auto it = manifest.find(key);
    if (it == manifest.end()) throw ConfigError(where + ": missing field '" + key + "'");
    return *it;
  };
  const DeconvolutionConfig stored = problem_from_json(field("problem"), where + " problem");
  const int n = Fields::convert<int>(field("n"), where + " n");
  const int m = Fields::convert<int>(field("m"), where + " m");
  const double sigma = Fields::convert<double>(field("sigma"), where + " sigma");
  if (problem_to_json(stored) != problem_to_json(cfg.problem))
    throw ConfigError(where + ": stored problem differs from the config; rerun `hbi generate`");
  if (n != stored.n || m != stored.m) throw ConfigError(where + ": n/m disagree with the problem block");

  const fs::path a_path = paths.problem() / "A_hat.csv";
  const fs::path b_path = paths.problem() / "b_hat.csv";
  require_file(a_path, "run `hbi generate` first");
  require_file(b_path, "run `hbi generate` first");
  const io::Table a = io::read_table(a_path);
  const io::Table b = io::read_table(b_path);
  if (a.values.rows() != m || a.values.cols() != n)
    throw IoError(a_path.string() + ": expected " + std::to_string(m) + " x " + std::to_string(n) + " values");
  if (b.values.rows() != m || b.values.cols() != 1)
    throw IoError(b_path.string() + ": expected " + std::to_string(m) + " values in one column");
  return InverseProblem(a.values, b.values.col(0), sigma);
}

void cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const Benchmark bm = build_problem(cfg.problem);
  const Paths paths{cfg.output_dir};
  io::ensure_directory(paths.problem());

  std::vector<double> times;
  for (int j = 1; j <= cfg.problem.m; ++j) times.push_back(observation_time(j, cfg.problem));
  const json manifest = {
      {"problem", problem_to_json(cfg.problem)},
      {"n", cfg.problem.n},
      {"m", cfg.problem.m},
      {"sigma", bm.problem.sigma()},
      {"files", {{"a_hat", "A_hat.csv"}, {"b_hat", "b_hat.csv"}}},
      {"observation_times", times},
      {"truth",
       {{"z_true", vector_json(bm.truth.z_true)},
        {"x_true", vector_json(bm.truth.x_true)},
        {"b_noiseless", vector_json(bm.truth.b_noiseless)},
        {"b", vector_json(bm.truth.b)}}},
  };
  io::write_json(paths.problem() / "manifest.json", manifest);
  io::write_table(paths.problem() / "A_hat.csv", io::indexed_names("a", bm.problem.n()), bm.problem.a_hat());
  io::write_table(paths.problem() / "b_hat.csv", {"b_hat"}, io::columns_to_matrix({&bm.problem.b_hat()}));
  log << "generate: n=" << cfg.problem.n << " m=" << cfg.problem.m << " -> " << paths.problem().string()
      << '\n';
}

bool cmd_map(const ExperimentConfig& cfg, double r, std::ostream& log) {
  cfg.validate();
  const Hypermodel reference(1.0, cfg.beta1, cfg.vartheta1);
  std::optional<Hypermodel> phase2;
  if (r != 1.0) {
    with_context("map r=" + r_label(r), [&] { phase2 = hypermodel_for(r, cfg); });
  }
  const InverseProblem prob = load_problem(cfg);
  const HybridResult res = hybrid_run(prob, HybridSchedule{reference, phase2, cfg.ias_tol, cfg.ias_max_iter});
  const Hypermodel& final_model = phase2 ? *phase2 : reference;

  const IASState& fs_ = res.final_state();
  const Vector vartheta = final_model.vartheta_vector(prob.n());
  const Vector x = (vartheta.array().sqrt() * fs_.xi.array()).matrix();
  const Vector theta = (vartheta.array() * fs_.lambda.array()).matrix();
  const Vector z = integrate_increments(x);
  Vector k(static_cast<Eigen::Index>(prob.n()));
  for (Eigen::Index j = 0; j < k.size(); ++j) k[j] = static_cast<double>(j + 1);

  json doc = {{"r", r},
              {"reference", hypermodel_json(reference)},
              {"hypermodel", hypermodel_json(final_model)},
              {"converged", res.converged()},
              {"tol", cfg.ias_tol},
              {"max_iter", cfg.ias_max_iter},
              {"phase1", ias_json(res.phase1)},
              {"phase2", phase2 ? ias_json(res.phase2) : json(nullptr)}};
  if (phase2) {
    const CompatibilityResiduals c = compatibility_residuals(*phase2, cfg.beta1, cfg.vartheta1);
    doc["compatibility"] = {{"baseline", c.baseline}, {"mean", c.mean}};
  }

  const Paths paths{cfg.output_dir};
  const fs::path dir = paths.map(r);
  io::ensure_directory(dir);
  io::write_json(dir / "map.json", doc);
  io::write_table(dir / "map.csv", {"k", "xi", "lambda", "x", "theta", "z"},
                  io::columns_to_matrix({&k, &fs_.xi, &fs_.lambda, &x, &theta, &z}));

  log << "map r=" << r_label(r) << ": phase I " << res.phase1.iterations() << " iterations";
  if (phase2) {
    log << ", phase II " << res.phase2.iterations() << " iterations (beta=" << phase2->beta()
        << ", vartheta=" << phase2->vartheta(0) << ")";
  }
  log << (res.converged() ? "" : ", NOT converged") << '\n';
  return res.converged();
}

MapArtifact load_map(const ExperimentConfig& cfg, double r) {
  const fs::path dir = Paths{cfg.output_dir}.map(r);
  const std::string hint = "run `hbi map` for r=" + r_label(r) + " first";
  require_file(dir / "map.json", hint);
  require_file(dir / "map.csv", hint);
  const json doc = io::read_json(dir / "map.json");
  const auto it = doc.is_object() ? doc.find("converged") : doc.end();
  if (it == doc.end()) throw ConfigError((dir / "map.json").string() + ": missing field 'converged'");
  const io::Table t = io::read_table(dir / "map.csv");
  MapArtifact out{t.column("xi"), t.column("lambda"),
                  Fields::convert<bool>(*it, (dir / "map.json").string() + " converged")};
  if (out.xi.size() != cfg.problem.n)
    throw IoError((dir / "map.csv").string() + ": expected " + std::to_string(cfg.problem.n) + " rows");
  return out;
}

void cmd_sample(const ExperimentConfig& cfg, const std::string& run_id, std::ostream& log) {
  cfg.validate();
  const RunSpec& run = cfg.run(run_id);
  const InverseProblem prob = load_problem(cfg);
  const MapArtifact map = load_map(cfg, run.r);
  if (!map.converged) log << "sample " << run.id << ": warning: MAP initializer did not converge\n";
  const Hypermodel hm = hypermodel_for(run.r, cfg);
  const ReparamPoint init = to_reparam(map.xi, map.lambda, run.r);
  const SampleSet samples = run_chain(init, run.chain, prob, hm);
  const PhysicalDraws phys = samples_to_physical(samples, hm.vartheta_vector(prob.n()), run.r);
  const long excluded = std::count(phys.excluded.begin(), phys.excluded.end(), 1);

  const json meta = {{"run_id", run.id},
                     {"r", run.r},
                     {"hypermodel", hypermodel_json(hm)},
                     {"kernel", std::string(kernel_name(run.chain.kernel))},
                     {"h", run.chain.h},
                     {"k", run.chain.k},
                     {"seed", run.chain.seed},
                     {"total_steps", run.chain.total_steps},
                     {"thin", run.chain.thin},
                     {"stored_draws", samples.stored()},
                     {"accepted", samples.accept_count},
                     {"proposals", samples.total_proposals},
                     {"acceptance_rate", samples.acceptance_rate()},
                     {"excluded_draws", excluded},
                     {"init", {{"source", "map"}, {"file", "map/" + r_label(run.r) + "/map.csv"}}}};

  const fs::path dir = Paths{cfg.output_dir}.chain(run.id);
  io::ensure_directory(dir);
  std::vector<std::string> header = io::indexed_names("v", prob.n());
  for (auto& name : io::indexed_names("tau", prob.n())) header.push_back(std::move(name));
  io::write_table(dir / "samples.csv", header, samples.draws);

  const auto n = static_cast<Eigen::Index>(prob.n());
  const auto rows = static_cast<Eigen::Index>(samples.stored());
  Matrix physical(rows, 3 * n + 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    physical.row(i).segment(0, n) = phys.x.row(i);
    physical.row(i).segment(n, n) = phys.theta.row(i);
    physical.row(i).segment(2 * n, n) = phys.z.row(i);
    physical(i, 3 * n) = phys.excluded[static_cast<std::size_t>(i)];
  }
  std::vector<std::string> pheader = io::indexed_names("x", prob.n());
  for (auto& name : io::indexed_names("theta", prob.n())) pheader.push_back(std::move(name));
  for (auto& name : io::indexed_names("z", prob.n())) pheader.push_back(std::move(name));
  pheader.push_back("excluded");
  io::write_table(dir / "physical.csv", pheader, physical);
  io::write_json(dir / "meta.json", meta);

  log << "sample " << run.id << ": r=" << r_label(run.r) << " " << kernel_name(run.chain.kernel)
      << " h=" << run.chain.h << " acceptance=" << 100.0 * samples.acceptance_rate() << "% stored="
      << samples.stored() << '\n';
}

ChainArtifact load_chain(const ExperimentConfig& cfg, const std::string& run_id) {
  const RunSpec& run = cfg.run(run_id);
  const fs::path dir = Paths{cfg.output_dir}.chain(run.id);
  const std::string hint = "run `hbi sample --run " + run.id + "` first";
  require_file(dir / "meta.json", hint);
  require_file(dir / "samples.csv", hint);
  const json meta = io::read_json(dir / "meta.json");
  const std::string where = (dir / "meta.json").string();
  if (!meta.is_object()) throw ConfigError(where + ": expected an object");
  const auto field = [&](const char* key) -> const json& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ConfigError(where + ": missing field '" + key + "'");
    return *it;
  };

  ChainArtifact out;
  out.r = Fields::convert<double>(field("r"), where + " r");
  out.samples.config = run.chain;
  out.samples.accept_count = Fields::convert<long>(field("accepted"), where + " accepted");
  out.samples.total_proposals = Fields::convert<long>(field("proposals"), where + " proposals");
  const bool same = out.r == run.r &&
                    Fields::convert<std::string>(field("kernel"), where + " kernel") == kernel_name(run.chain.kernel) &&
                    Fields::convert<double>(field("h"), where + " h") == run.chain.h &&
                    Fields::convert<double>(field("k"), where + " k") == run.chain.k &&
                    Fields::convert<std::uint64_t>(field("seed"), where + " seed") == run.chain.seed &&
                    Fields::convert<long>(field("total_steps"), where + " total_steps") == run.chain.total_steps &&
                    Fields::convert<long>(field("thin"), where + " thin") == run.chain.thin;
  if (!same) throw ConfigError(where + ": chain was produced with different run settings; " + hint);

  const io::Table t = io::read_table(dir / "samples.csv");
  if (t.values.cols() != 2 * static_cast<Eigen::Index>(cfg.problem.n))
    throw IoError((dir / "samples.csv").string() + ": expected " + std::to_string(2 * cfg.problem.n) + " columns");
  out.samples.draws = t.values;
  return out;
}

void cmd_diagnose(const ExperimentConfig& cfg, const std::string& run_id, std::ostream& log) {
  cfg.validate();
  const ChainArtifact chain = load_chain(cfg, run_id);
  const Hypermodel hm = hypermodel_for(chain.r, cfg);
  const SampleSet& samples = chain.samples;
  if (samples.stored() == 0)
    throw ConfigError("diagnose " + run_id + ": the chain stored no draws (total_steps < thin)");
  const PhysicalDraws phys = samples_to_physical(samples, hm.vartheta_vector(samples.n()), chain.r);
  ReportOptions opts = cfg.report;
  opts.beta1 = cfg.beta1;
  opts.vartheta1 = cfg.vartheta1;
  const DiagnosticsReport rep = make_report(samples, phys, opts);
  if (rep.lags_truncated)
    log << "diagnose " << run_id << ": warning: only " << rep.stored_draws << " draws, lags truncated to "
        << rep.max_lag << '\n';

  json probes = json::array();
  for (const auto& p : rep.probes) {
    probes.push_back({{"index", p.index},
                      {"acf_x", p.x.values},
                      {"acf_theta", p.theta.values},
                      {"acf_x_literal", p.x_literal.values},
                      {"acf_theta_literal", p.theta_literal.values},
                      {"degenerate", p.x.degenerate || p.theta.degenerate}});
  }
  const json doc = {
      {"run_id", run_id},
      {"r", chain.r},
      {"acceptance_rate", rep.acceptance_rate},
      {"stored_draws", rep.stored_draws},
      {"excluded_draws", rep.excluded_draws},
      {"max_lag", rep.max_lag},
      {"lags_truncated", rep.lags_truncated},
      {"level", opts.level},
      {"delta", rep.delta},
      {"reference", {{"beta1", opts.beta1}, {"vartheta1", opts.vartheta1}}},
      {"probes", probes},
      {"compressibility",
       {{"mode", rep.compressibility.mode()},
        {"counts_per_draw", rep.compressibility.counts_per_draw},
        {"frequency", rep.compressibility.frequency}}},
      {"mean", {{"z", vector_json(rep.z.mean)}, {"x", vector_json(rep.x.mean)}, {"theta", vector_json(rep.theta.mean)}}},
      {"envelope_lo", {{"z", vector_json(rep.z.lo)}, {"x", vector_json(rep.x.lo)}, {"theta", vector_json(rep.theta.lo)}}},
      {"envelope_hi", {{"z", vector_json(rep.z.hi)}, {"x", vector_json(rep.x.hi)}, {"theta", vector_json(rep.theta.hi)}}},
  };

  const auto n = static_cast<Eigen::Index>(samples.n());
  Vector k(n), s(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k[j] = static_cast<double>(j + 1);
    s[j] = coarse_node(static_cast<int>(j + 1), static_cast<int>(n));
  }
  const Matrix envelopes = io::columns_to_matrix({&k, &s, &rep.z.lo, &rep.z.mean, &rep.z.hi, &rep.x.lo, &rep.x.mean,
                                                  &rep.x.hi, &rep.theta.lo, &rep.theta.mean, &rep.theta.hi});

  std::vector<std::string> acf_header{"lag"};
  Matrix acf(rep.max_lag + 1, static_cast<Eigen::Index>(1 + 4 * rep.probes.size()));
  for (Eigen::Index l = 0; l <= rep.max_lag; ++l) acf(l, 0) = static_cast<double>(l);
  Eigen::Index col = 1;
  for (const auto& p : rep.probes) {
    const std::string j = std::to_string(p.index);
    for (const auto* a : {&p.x, &p.theta, &p.x_literal, &p.theta_literal}) {
      for (Eigen::Index l = 0; l <= rep.max_lag; ++l) {
        const auto idx = static_cast<std::size_t>(l);
        acf(l, col) = idx < a->values.size() ? a->values[idx] : std::nan("");
      }
      ++col;
    }
    for (const char* name : {"x_", "theta_", "x_literal_", "theta_literal_"}) acf_header.push_back(name + j);
  }

  const auto bins = static_cast<Eigen::Index>(rep.compressibility.frequency.size());
  Matrix hist(bins, 4);
  for (Eigen::Index c = 0; c < bins; ++c) {
    hist(c, 0) = static_cast<double>(c);
    hist(c, 1) = static_cast<double>(c) - 0.5;
    hist(c, 2) = static_cast<double>(c) + 0.5;
    hist(c, 3) = static_cast<double>(rep.compressibility.frequency[static_cast<std::size_t>(c)]);
  }

  std::vector<std::string> pair_header;
  for (int p : opts.probes) {
    pair_header.push_back("x_" + std::to_string(p));
    pair_header.push_back("theta_" + std::to_string(p));
  }
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < phys.x.rows(); ++i) {
    if (phys.excluded[static_cast<std::size_t>(i)] == 0) kept.push_back(i);
  }
  Matrix pairs(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(pair_header.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t q = 0; q < opts.probes.size(); ++q) {
      const auto j = static_cast<Eigen::Index>(opts.probes[q] - 1);
      pairs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * q)) = phys.x(kept[i], j);
      pairs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * q + 1)) = phys.theta(kept[i], j);
    }
  }

  const fs::path dir = Paths{cfg.output_dir}.report(run_id);
  io::ensure_directory(dir);
  io::write_json(dir / "report.json", doc);
  io::write_table(dir / "envelopes.csv",
                  {"k", "s", "z_lo", "z_mean", "z_hi", "x_lo", "x_mean", "x_hi", "theta_lo", "theta_mean", "theta_hi"},
                  envelopes);
  io::write_table(dir / "autocorr.csv", acf_header, acf);
  io::write_table(dir / "compressibility.csv", {"count", "edge_lo", "edge_hi", "frequency"}, hist);
  io::write_table(dir / "pairs.csv", pair_header, pairs);

  log << "diagnose " << run_id << ": delta=" << rep.delta << " compressibility mode=" << rep.compressibility.mode()
      << '\n';
}

bool cmd_all(const ExperimentConfig& cfg, std::ostream& log) {
  cmd_generate(cfg, log);
  for (double r : cfg.map_targets()) {
    if (!cmd_map(cfg, r, log)) return false;
  }
  for (const auto& run : cfg.runs) {
    cmd_sample(cfg, run.id, log);
    cmd_diagnose(cfg, run.id, log);
  }
  return true;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return 4;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e))
    return 2;
  return 1;
}

}  // namespace hbi
