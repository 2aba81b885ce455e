#include "matfdp/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "matfdp/covfactor.hpp"
#include "matfdp/dataset_io.hpp"
#include "matfdp/errors.hpp"
#include "matfdp/noodle.hpp"
#include "matfdp/parallel.hpp"
#include "matfdp/sandwich.hpp"
#include "matfdp/simlab.hpp"
#include "matfdp/teststats.hpp"

namespace matfdp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::size_t kSweepCap = 100;

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  int model = 1;
  std::optional<std::string> setting;
  std::optional<Index> p, q;
  std::optional<std::size_t> n, m;
  std::uint64_t seed = 1;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model, "Simulation model")->check(CLI::Range(1, 3));
  cmd->add_option("--setting", f.setting, "Named preset (1/2: a|b; 3: 22-exp, 33-t6, 44-exp, 24-t6, ...)");
  cmd->add_option("--p", f.p, "Rows per observation")->check(CLI::PositiveNumber);
  cmd->add_option("--q", f.q, "Columns per observation")->check(CLI::PositiveNumber);
  cmd->add_option("--n", f.n, "Treatment sample size")->check(CLI::PositiveNumber);
  cmd->add_option("--m", f.m, "Control sample size")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Base seed");
}

ModelSpec to_spec(const ModelFlags& f) {
  const std::string setting = f.setting.value_or(f.model == 3 ? "22-exp" : "a");
  ModelSpec s;
  try {
    s = ModelSpec::preset(f.model, setting);
    if (f.p) s.p = *f.p;
    if (f.q) s.q = *f.q;
    if (f.n) s.n = *f.n;
    if (f.m) s.m = *f.m;
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return s;
}

EstimatorSpec to_estimator(const std::string& name, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw UsageError("--trim-fraction must lie in (0, 1]");
  if (name == "ls") return EstimatorSpec::least_squares();
  return EstimatorSpec::trimmed(fraction);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError(dir.string() + ": cannot create output directory");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OutputError(path.string() + ": cannot write file");
  f << text;
  if (!f) throw OutputError(path.string() + ": write failed");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---- simulate -------------------------------------------------------------

struct SimulateFlags {
  ModelFlags model;
  double t = 0.001;
  std::size_t rounds = 100;
  std::string methods = "noodle,sandwich,pfa";
  std::string estimator = "trimmed";
  double trim_fraction = 0.9;
  std::string out;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.spec = to_spec(f.model);
  cfg.t = f.t;
  cfg.rounds = f.rounds;
  cfg.seed = f.model.seed;
  cfg.estimator = to_estimator(f.estimator, f.trim_fraction);
  cfg.methods.clear();
  for (const std::string& name : split_list(f.methods)) {
    Method m;
    try {
      m = parse_method(name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end()) cfg.methods.push_back(m);
  }
  if (cfg.methods.empty()) throw UsageError("--methods is empty");
  if (!(cfg.t > 0.0 && cfg.t < 1.0)) throw UsageError("--t must lie in (0, 1)");
  if (cfg.rounds == 0) throw UsageError("--rounds must be positive");

  const fs::path dir(f.out);
  ensure_dir(dir);
  const ExperimentResult res = run_experiment(cfg);

  std::string csv = "round,method,fdp_hat,fdp_true,R\n";
  for (const RoundRecord& r : res.records) {
    csv += std::to_string(r.round + 1) + ',' + method_name(r.method) + ',' + format_double(r.fdp_hat) + ',' +
           format_double(r.fdp_true) + ',' + std::to_string(r.rejections) + '\n';
  }
  write_text(dir / "rounds.csv", csv);

  json summary;
  summary["schema_version"] = 1;
  json method_names = json::array();
  for (Method m : cfg.methods) method_names.push_back(method_name(m));
  summary["config"] = {
      {"model", cfg.spec.model},
      {"setting", f.model.setting.value_or(cfg.spec.model == 3 ? "22-exp" : "a")},
      {"p", cfg.spec.p},
      {"q", cfg.spec.q},
      {"n", cfg.spec.n},
      {"m", cfg.spec.m},
      {"t", cfg.t},
      {"rounds", cfg.rounds},
      {"seed", cfg.seed},
      {"methods", method_names},
      {"estimator", cfg.estimator.kind == FactorEstimator::least_squares ? "ls" : "trimmed"},
      {"trim_fraction", cfg.estimator.trim_fraction},
  };
  json methods = json::object();
  for (Method m : cfg.methods) {
    const MethodSummary& s = res.summary.at(m);
    methods[method_name(m)] = {{"bias_pct", s.bias_pct}, {"sd_pct", s.sd_pct}, {"rounds", s.rounds}};
  }
  summary["methods"] = methods;
  json failures = json::array();
  for (const RoundFailure& fl : res.failures) failures.push_back({{"round", fl.round + 1}, {"message", fl.message}});
  summary["failures"] = failures;
  write_text(dir / "summary.json", summary.dump(2) + '\n');

  for (Method m : cfg.methods) {
    const MethodSummary& s = res.summary.at(m);
    out << method_name(m) << ": bias " << s.bias_pct << "%  sd " << s.sd_pct << "%  over " << s.rounds
        << " rounds\n";
  }
  if (!res.failures.empty()) out << res.failures.size() << " round(s) failed; see summary.json\n";
  return kExitOk;
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeFlags {
  std::string data;
  std::string method = "sandwich";
  std::optional<double> threshold;
  std::optional<long long> sweep;
  std::string estimator = "trimmed";
  double trim_fraction = 0.9;
  std::string out;
};

struct Analysis {
  std::optional<NoodleFit> noodle;
  std::optional<SandwichFit> sandwich;

  double fdp(std::size_t r, double t) const {
    return noodle ? fdp_noodle(*noodle, r, t) : fdp_sandwich(*sandwich, r, t);
  }
};

std::string report_row(double t, std::size_t r, double raw) {
  const double fdp = clamp_proportion(raw);
  return format_double(t) + ',' + std::to_string(r) + ',' + format_double(fdp) + ',' +
         format_double(fdp * static_cast<double>(r)) + '\n';
}

std::string scree_csv(const CorrEstimates& ce) {
  std::string s = "series,index,value\n";
  for (Index i = 0; i < ce.eig1.values.size(); ++i) {
    s += "lambda," + std::to_string(i + 1) + ',' + format_double(ce.eig1.values(i)) + '\n';
  }
  for (Index j = 0; j < ce.eig2.values.size(); ++j) {
    s += "xi," + std::to_string(j + 1) + ',' + format_double(ce.eig2.values(j)) + '\n';
  }
  const KronEigenIndex kron = kron_eigenpairs(ce.eig1, ce.eig2);
  for (std::size_t k = 0; k < kron.size(); ++k) {
    s += "product," + std::to_string(k + 1) + ',' + format_double(kron.entries[k].value) + '\n';
  }
  return s;
}

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out) {
  if (f.method != "noodle" && f.method != "sandwich") throw UsageError("--method must be noodle or sandwich");
  if (f.threshold && f.sweep) throw UsageError("--threshold and --sweep are mutually exclusive");
  if (f.threshold && !(*f.threshold > 0.0 && *f.threshold < 1.0)) throw UsageError("--threshold must lie in (0, 1)");
  const long long step = f.sweep.value_or(25);
  if (step < 1) throw UsageError("--sweep must be a positive integer");
  const EstimatorSpec est = to_estimator(f.estimator, f.trim_fraction);

  const TwoSampleDataset ds = load_dataset(f.data);
  const fs::path dir(f.out);
  ensure_dir(dir);

  TestMatrix tm;
  try {
    tm = test_matrix(ds);
  } catch (const DegenerateVariance& e) {
    throw InvalidDataset(f.data + ": " + e.what());
  }
  const Matrix pv = p_values(tm);
  const CorrEstimates ce = estimate_correlations(ds, tm.sigma_hat);
  Analysis a;
  if (f.method == "noodle") {
    a.noodle = fit_noodle(tm, build_noodle_loadings(ce), est);
  } else {
    a.sandwich = fit_sandwich(tm, build_sandwich_loadings(ce), est);
  }

  std::string report = "t,R,fdp_hat,est_false_discoveries\n";
  if (f.threshold) {
    const double t = *f.threshold;
    const std::size_t r = rejection_count(pv, t);
    Matrix sel(pv.rows(), pv.cols());
    for (Index k = 0; k < pv.size(); ++k) sel.data()[k] = pv.data()[k] <= t ? 1.0 : 0.0;
    write_matrix_csv(dir / "selection.csv", sel);
    const double raw = a.fdp(r, t);
    report += report_row(t, r, raw);
    out << "t=" << t << "  R=" << r << "  FDP_hat=" << clamp_proportion(raw) << '\n';
  } else {
    std::vector<double> sorted(pv.data(), pv.data() + pv.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t steps = std::min(sorted.size() / static_cast<std::size_t>(step), kSweepCap);
    double prev = 0.0;
    std::size_t rows = 0;
    for (std::size_t i = 1; i <= steps; ++i) {
      const double t = sorted[i * static_cast<std::size_t>(step) - 1];
      if (!(t > prev) || !(t < 1.0)) continue;  // keep thresholds strictly increasing
      prev = t;
      const auto r = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
      report += report_row(t, r, a.fdp(r, t));
      ++rows;
    }
    out << rows << " thresholds written\n";
  }
  write_text(dir / "report.csv", report);
  write_text(dir / "scree.csv", scree_csv(ce));
  return kExitOk;
}

// ---- gen-synthetic --------------------------------------------------------

int cmd_gen_synthetic(const ModelFlags& f, const std::string& out_dir, std::ostream& out) {
  const ModelSpec spec = to_spec(f);
  CounterRng design(f.seed, 0, 0);
  const RoundGenerator gen(spec, gen_correlations(spec, design));
  const auto [ds, mask] = gen.generate(f.seed, 0);
  const fs::path dir(out_dir);
  write_dataset(dir, ds);
  Matrix signal(spec.p, spec.q);
  for (Index j = 0; j < spec.q; ++j) {
    for (Index i = 0; i < spec.p; ++i) signal(i, j) = mask(i, j) ? 0.0 : 1.0;
  }
  write_matrix_csv(dir / "signal_mask.csv", signal);
  out << "wrote " << ds.n() << " + " << ds.m() << " observations of " << spec.p << "x" << spec.q << " to "
      << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_threads_from_env();

  CLI::App app{"FDP estimation for two-sample matrix-valued multiple testing", "matfdp"};
  app.require_subcommand(1);

  SimulateFlags sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo comparison of the FDP estimators");
  add_model_flags(simulate, sim.model);
  simulate->add_option("--t", sim.t, "Rejection threshold on p-values");
  simulate->add_option("--rounds", sim.rounds, "Number of rounds");
  simulate->add_option("--methods", sim.methods, "Comma-separated subset of noodle,sandwich,pfa");
  simulate->add_option("--estimator", sim.estimator, "Factor estimator")->check(CLI::IsMember({"ls", "trimmed"}));
  simulate->add_option("--trim-fraction", sim.trim_fraction, "Fraction of cells kept by the trimmed fit");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  AnalyzeFlags ana;
  CLI::App* analyze = app.add_subcommand("analyze", "Estimate FDP on a dataset directory");
  analyze->add_option("--data", ana.data, "Dataset directory containing manifest.json")->required();
  analyze->add_option("--method", ana.method, "Estimator")->check(CLI::IsMember({"noodle", "sandwich"}));
  analyze->add_option("--threshold", ana.threshold, "Single p-value threshold");
  analyze->add_option("--sweep", ana.sweep, "Sweep step over sorted p-values (default 25)");
  analyze->add_option("--estimator", ana.estimator, "Factor estimator")->check(CLI::IsMember({"ls", "trimmed"}));
  analyze->add_option("--trim-fraction", ana.trim_fraction, "Fraction of cells kept by the trimmed fit");
  analyze->add_option("--out", ana.out, "Output directory")->required();

  ModelFlags gen_flags;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-synthetic", "Write one simulated round as a dataset directory");
  add_model_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (analyze->parsed()) return cmd_analyze(ana, out);
    return cmd_gen_synthetic(gen_flags, gen_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const InvalidDataset& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadData;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnwritable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace matfdp
