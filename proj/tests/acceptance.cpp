// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Set MATFDP_FULL_SCALE=1 to add the 100 x 100, 500-round run.
#include <omp.h>
#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "matfdp/cli.hpp"
#include "matfdp/covfactor.hpp"
#include "matfdp/noodle.hpp"
#include "matfdp/normal.hpp"
#include "matfdp/parallel.hpp"
#include "matfdp/pfa.hpp"
#include "matfdp/sandwich.hpp"
#include "matfdp/simlab.hpp"
#include "matfdp/trimreg.hpp"
#include "oracles.hpp"

using namespace matfdp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double peak_rss_gb() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<double>(ru.ru_maxrss) / (1024.0 * 1024.0);  // KiB on Linux
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

TestMatrix from_x(const Matrix& x) { return TestMatrix{x, Matrix::Ones(x.rows(), x.cols()), 1.0}; }

Outcome kron_eigen_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1001);
  double worst_val = 0, worst_proj = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index p = 1 + trial % 8, q = 1 + (trial * 3) % 8;
    const Matrix a = oracle::random_spd(p, gen), b = oracle::random_spd(q, gen);
    const KronEigenIndex idx = kron_eigenpairs(sym_eigen(a), sym_eigen(b));
    const EigenSystem ea = sym_eigen(a), eb = sym_eigen(b);
    const oracle::DenseEigen de = oracle::dense_eigen(oracle::kron(b, a));
    Matrix proj = Matrix::Zero(p * q, p * q);
    for (Index k = 0; k < p * q; ++k) {
      const KronEntry& e = idx[static_cast<std::size_t>(k)];
      worst_val = std::max(worst_val, std::abs(e.value - de.values(k)));
      const Vector rho = oracle::kron_vec(eb.vectors.col(e.j), ea.vectors.col(e.i));
      proj += rho * rho.transpose();
      const bool gap = k + 1 == p * q || de.values(k) - de.values(k + 1) > 1e-6 * std::max(1.0, de.values(0));
      if (gap) worst_proj = std::max(worst_proj, (proj - oracle::projector(de.vectors, k + 1)).norm());
    }
  }
  const double secs = seconds_since(t0);
  return {worst_val <= 1e-10 && worst_proj <= 1e-8 && secs < 5.0,
          fmt("max |eigenvalue err| %.2e, max projector err %.2e, %.2f s", worst_val, worst_proj, secs)};
}

Outcome sandwich_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1002);
  double worst_proj = 0, worst_fdp = 0;
  int compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index p = 1 + trial % 8, q = 1 + (trial * 5) % 8;
    const auto ce = CorrEstimates::from_matrices(oracle::random_corr(p, gen), oracle::random_corr(q, gen), 40);
    const Index k1 = 1 + trial % std::min<Index>(p, 2), k2 = 1 + (trial / 2) % std::min<Index>(q, 2);
    const SandwichLoadings sl = build_sandwich_loadings(ce, k1, k2);
    const Matrix x = oracle::gaussian(p, q, gen);
    const Vector expect = oracle::kron(oracle::projector(sl.gamma, k2), oracle::projector(sl.nu, k1)) * oracle::vec(x);
    const SandwichFit fit = fit_sandwich(from_x(x), sl);
    worst_proj = std::max(worst_proj, (oracle::vec(sandwich_projection(sl, x)) - expect).cwiseAbs().maxCoeff());
    worst_proj = std::max(worst_proj, (oracle::vec(fit.eta_hat) - expect).cwiseAbs().maxCoeff());

    // Factor sets coincide when the top k1 k2 products form the leading grid.
    const KronEigenIndex idx = kron_eigenpairs(ce.eig1, ce.eig2);
    const auto h = static_cast<std::size_t>(k1 * k2);
    bool grid = h == idx.size() || idx[h - 1].value > idx[h].value * (1 + 1e-9);
    for (std::size_t k = 0; k < h && grid; ++k) grid = idx[k].i < k1 && idx[k].j < k2;
    if (!grid) continue;
    ++compared;
    const NoodleFit nf = fit_noodle(from_x(x), build_noodle_loadings(ce, k1 * k2));
    for (double t : {0.001, 0.01, 0.1}) worst_fdp = std::max(worst_fdp, std::abs(fdp_sandwich(fit, 3, t) - fdp_noodle(nf, 3, t)));
  }
  const double secs = seconds_since(t0);
  return {worst_proj <= 1e-10 && worst_fdp <= 1e-10 && compared >= 10 && secs < 5.0,
          fmt("max projector err %.2e, max FDP gap %.2e over %.0f coinciding cases, %.2f s", worst_proj, worst_fdp,
              compared, secs)};
}

Outcome independent_case() {
  std::mt19937_64 gen(1003);
  const Index p = 6, q = 7;
  const TwoSampleDataset ds = oracle::random_dataset(p, q, 4, 5, gen, 0.3);
  const TestMatrix tm = test_matrix(ds);
  const auto ce = CorrEstimates::from_matrices(Matrix::Identity(p, p), Matrix::Identity(q, q), 9);
  const NoodleFit nf = fit_noodle(tm, build_noodle_loadings(ce, 0));
  const SandwichFit sf = fit_sandwich(tm, build_sandwich_loadings(ce, 0, 0));
  const PfaFit pf = fit_pfa(ds, tm, 0);
  double worst = 0;
  for (double t : {1e-4, 1e-3, 0.05, 0.5}) {
    for (std::size_t r : {1u, 4u, 40u}) {
      const double expect = static_cast<double>(p * q) * t / static_cast<double>(r);
      for (double v : {fdp_noodle(nf, r, t), fdp_sandwich(sf, r, t), fdp_pfa(pf, r, t)}) {
        worst = std::max(worst, std::abs(v - expect) / expect);
      }
    }
  }
  return {worst <= 1e-12, fmt("max relative deviation from pq t / R: %.2e", worst)};
}

Outcome unit_diagonal() {
  std::mt19937_64 gen(1004);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 2 + trial % 7, q = 3 + trial % 5;
    const TwoSampleDataset ds = oracle::random_dataset(p, q, 3 + trial % 4, 2 + trial % 5, gen, 0.1 * trial);
    const CorrEstimates ce = estimate_correlations(ds, test_matrix(ds).sigma_hat);
    worst = std::max(worst, (ce.sigma1.diagonal().array() - 1.0).abs().maxCoeff());
    worst = std::max(worst, (ce.sigma2.diagonal().array() - 1.0).abs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("max |diag - 1| over 20 datasets: %.2e", worst)};
}

Outcome simulation_bias() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.spec = ModelSpec::preset(1, "a");
  cfg.spec.p = cfg.spec.q = 50;
  cfg.spec.n = cfg.spec.m = 50;
  cfg.methods = {Method::sandwich, Method::pfa};
  cfg.t = 0.001;
  cfg.rounds = 200;
  cfg.seed = 7;
  const ExperimentResult r = run_experiment(cfg);
  const double sw = r.summary.at(Method::sandwich).bias_pct, pfa = r.summary.at(Method::pfa).bias_pct;
  Outcome o{sw >= -1.0 && sw <= 3.5 && pfa < 0.0 && r.failures.empty(),
            fmt("p=q=50, 200 rounds: sandwich bias %.3f%% (sd %.3f%%), PFA bias %.3f%%, %.1f s", sw,
                r.summary.at(Method::sandwich).sd_pct, pfa, seconds_since(t0))};
  const char* full = std::getenv("MATFDP_FULL_SCALE");
  if (full && std::string(full) == "1") {
    const auto t1 = Clock::now();
    cfg.spec.p = cfg.spec.q = 100;
    cfg.rounds = 500;
    const ExperimentResult big = run_experiment(cfg);
    const double bs = big.summary.at(Method::sandwich).bias_pct, bp = big.summary.at(Method::pfa).bias_pct;
    o.pass = o.pass && bs >= -0.5 && bs <= 1.5 && bp >= -3.5 && bp <= -0.5;
    o.detail += fmt("; p=q=100, 500 rounds: sandwich %.3f%% (sd %.3f%%), PFA %.3f%%, %.0f s", bs,
                    big.summary.at(Method::sandwich).sd_pct, bp, seconds_since(t1));
  } else {
    o.detail += "; full 100x100 run skipped (MATFDP_FULL_SCALE=1 enables it)";
  }
  return o;
}

Outcome large_scale() {
  ModelSpec spec = ModelSpec::preset(2, "a");
  spec.p = spec.q = 500;
  spec.n = spec.m = 100;
  CounterRng design(11, 0, 0);
  const auto g0 = Clock::now();
  const RoundGenerator gen(spec, gen_correlations(spec, design));
  auto [ds, mask] = gen.generate(11, 0);
  const double gen_secs = seconds_since(g0);

  const auto t0 = Clock::now();
  const TestMatrix tm = test_matrix(ds);
  const std::size_t r = rejection_count(p_values(tm), 1e-4);
  const CorrEstimates ce = estimate_correlations(ds, tm.sigma_hat);
  const SandwichFit fit = fit_sandwich(tm, build_sandwich_loadings(ce), EstimatorSpec::trimmed());
  const double fdp = fdp_sandwich(fit, r, 1e-4);
  const double secs = seconds_since(t0);
  const double gb = peak_rss_gb();
  return {secs < 60.0 && gb < 4.0 && std::isfinite(fdp),
          fmt("p=q=500, n=m=100: sandwich %.1f s (data generation %.1f s excluded), peak RSS %.2f GB, FDP_hat %.4f",
              secs, gen_secs, gb, fdp)};
}

Outcome trimmed_l1() {
  std::mt19937_64 gen(1007);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 30 + trial, k = 1 + trial % 4;
    const Matrix b = oracle::gaussian(n, k, gen);
    const Vector w0 = oracle::gaussian(k, 1, gen);
    const Vector z = b * w0;
    const TrimmedFit fit = trimmed_l1_fit(std::span<const double>(z.data(), static_cast<std::size_t>(n)),
                                          DenseLoadingRows(b), TrimSpec{1.0});
    worst = std::max(worst, (fit.w - w0).cwiseAbs().maxCoeff());
  }
  const std::vector<double> z{1, 1, 1, 100};
  const TrimmedFit out = trimmed_l1_fit(z, DenseLoadingRows(Matrix::Ones(4, 1)), TrimSpec{0.75});
  const double err = std::abs(out.w(0) - 1.0);
  return {worst <= 1e-6 && err <= 1e-6 && out.kept == 3,
          fmt("noiseless recovery max err %.2e; outlier example W = %.9f (kept %.0f)", worst, out.w(0),
              static_cast<double>(out.kept))};
}

Outcome sampler_law() {
  std::mt19937_64 gen(1008);
  const Matrix u = oracle::random_spd(3, gen), v = oracle::random_spd(3, gen);
  const Matrix target = oracle::kron(v, u);
  CounterRng rng(8);
  const int draws = 10000;
  Matrix acc = Matrix::Zero(9, 9);
  Vector mean = Vector::Zero(9);
  std::vector<Vector> xs;
  for (int k = 0; k < draws; ++k) {
    xs.push_back(oracle::vec(sample_matrix_normal(Matrix::Zero(3, 3), u, v, rng)));
    mean += xs.back();
  }
  mean /= draws;
  for (const Vector& x : xs) acc += (x - mean) * (x - mean).transpose();
  acc /= draws - 1;
  const double rel = (acc - target).norm() / target.norm();
  return {rel < 0.1, fmt("relative Frobenius error of vec covariance at 10^4 draws: %.4f", rel)};
}

Outcome pfa_gram() {
  std::mt19937_64 gen(1009);
  double worst = 0;
  int cases = 0;
  for (Index p = 1; p <= 8; ++p) {
    for (Index q = 1; q <= 8; ++q) {
      if (p * q > 64) continue;
      const TwoSampleDataset ds = oracle::random_dataset(p, q, 3 + static_cast<std::size_t>(q % 3), 4, gen);
      const ThinFactor tf = build_thin_factor(ds);
      Matrix s = Matrix::Zero(p * q, p * q);
      for (Index c = 0; c < tf.f.cols(); ++c) s += tf.f.col(c) * tf.f.col(c).transpose();
      const oracle::DenseEigen de = oracle::dense_eigen(s);
      for (Index k = 0; k < p * q; ++k) {
        const double g = k < tf.values.size() ? tf.values(k) : 0.0;
        worst = std::max(worst, std::abs(g - de.values(k)));
      }
      ++cases;
    }
  }
  return {worst <= 1e-8, fmt("max eigenvalue gap over %.0f shapes with pq <= 64: %.2e", cases, worst)};
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / ("matfdp_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  const int saved = thread_count();
  const int max_threads = std::max(4, omp_get_num_procs());
  std::vector<std::string> csvs;
  std::vector<int> counts{1, 2, max_threads};
  bool ok = true;
  for (int threads : counts) {
    set_thread_count(threads);
    ::setenv("MATFDP_THREADS", std::to_string(threads).c_str(), 1);
    const std::string dir = (base / std::to_string(threads)).string();
    std::vector<const char*> argv{"matfdp", "simulate", "--model", "3", "--setting", "24-t6", "--p", "30",
                                  "--q", "40", "--n", "12", "--m", "10", "--t", "0.01", "--rounds", "6",
                                  "--seed", "77", "--out", dir.c_str()};
    std::ostringstream out, err;
    ok = ok && run_cli(static_cast<int>(argv.size()), argv.data(), out, err) == kExitOk;
    std::ifstream in(fs::path(dir) / "rounds.csv", std::ios::binary);
    csvs.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  ::unsetenv("MATFDP_THREADS");
  set_thread_count(saved);
  fs::remove_all(base);
  for (const auto& c : csvs) ok = ok && !c.empty() && c == csvs[0];
  return {ok, fmt("rounds.csv identical at 1, 2 and %.0f threads (%.0f bytes)", max_threads,
                  static_cast<double>(csvs[0].size()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Kronecker eigen oracle", kron_eigen_oracle},
      {"Sandwich identity", sandwich_identity},
      {"Independent-case closed form", independent_case},
      {"Unit diagonal", unit_diagonal},
      {"Desk-scale simulation bias", simulation_bias},
      {"Large-scale feasibility", large_scale},
      {"Trimmed L1", trimmed_l1},
      {"Sampler law", sampler_law},
      {"PFA Gram route", pfa_gram},
      {"Determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
