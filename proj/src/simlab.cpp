#include "matfdp/simlab.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "matfdp/covfactor.hpp"
#include "matfdp/errors.hpp"
#include "matfdp/noodle.hpp"
#include "matfdp/parallel.hpp"
#include "matfdp/pfa.hpp"
#include "matfdp/sandwich.hpp"

namespace matfdp {

void ModelSpec::validate() const {
  if (model < 1 || model > 3) throw std::invalid_argument("model must be 1, 2 or 3");
  if (p < 1 || q < 1) throw std::invalid_argument("p and q must be positive");
  if (n < 2 || m < 2 || n + m < 5) throw std::invalid_argument("need n >= 2, m >= 2 and n + m >= 5");
  if (l1 < 0 || l2 < 0) throw std::invalid_argument("factor counts must be non-negative");
  if (signal.rows < 0 || signal.cols < 0 || signal.rows > p || signal.cols > q) {
    throw std::invalid_argument("signal block must fit inside the p x q matrix");
  }
  if (model == 2 && !(std::fabs(rho1) < 1.0 && std::fabs(rho2) < 1.0)) {
    throw std::invalid_argument("rho1 and rho2 must lie in (-1, 1)");
  }
  if (loading_dist == LoadingDist::uniform && !(loading_lo < loading_hi)) {
    throw std::invalid_argument("uniform loading bounds must satisfy lo < hi");
  }
}

ModelSpec ModelSpec::preset(int model, const std::string& setting) {
  ModelSpec s;
  s.model = model;
  if (model == 1) {
    if (setting == "a") {
      s.l1 = 2, s.l2 = 4, s.loading_dist = LoadingDist::uniform, s.loading_lo = -1.0, s.loading_hi = 1.0;
    } else if (setting == "b") {
      s.l1 = 3, s.l2 = 3, s.loading_dist = LoadingDist::std_normal;
    } else {
      throw std::invalid_argument("model 1 settings are 'a' and 'b'");
    }
  } else if (model == 2) {
    s.l1 = 3, s.l2 = 3, s.loading_dist = LoadingDist::uniform, s.loading_lo = 0.0, s.loading_hi = 1.0;
    if (setting == "a") {
      s.rho1 = 0.5, s.rho2 = 0.3;
    } else if (setting == "b") {
      s.rho1 = 0.5, s.rho2 = 0.8;
    } else {
      throw std::invalid_argument("model 2 settings are 'a' and 'b'");
    }
  } else if (model == 3) {
    s.loading_dist = LoadingDist::uniform, s.loading_lo = 0.0, s.loading_hi = 1.0;
    const auto dash = setting.find('-');
    const std::string factors = setting.substr(0, dash);
    const std::string dist = dash == std::string::npos ? "" : setting.substr(dash + 1);
    if (factors == "22") {
      s.l1 = 2, s.l2 = 2;
    } else if (factors == "33") {
      s.l1 = 3, s.l2 = 3;
    } else if (factors == "44") {
      s.l1 = 4, s.l2 = 4;
    } else if (factors == "24") {
      s.l1 = 2, s.l2 = 4;
    } else {
      throw std::invalid_argument("model 3 settings look like 22-exp, 33-t6, 44-exp, 24-t6");
    }
    if (dist == "exp") {
      s.w_dist = WDist::exp1;
    } else if (dist == "t6") {
      s.w_dist = WDist::scaled_t6;
    } else {
      throw std::invalid_argument("model 3 settings look like 22-exp, 33-t6, 44-exp, 24-t6");
    }
  } else {
    throw std::invalid_argument("model must be 1, 2 or 3");
  }
  return s;
}

namespace {

Matrix loadings(Index rows, Index cols, const ModelSpec& spec, CounterRng& rng) {
  Matrix b(rows, cols);
  for (Index k = 0; k < b.size(); ++k) {
    b.data()[k] = spec.loading_dist == LoadingDist::std_normal ? rng.normal()
                                                               : rng.uniform(spec.loading_lo, spec.loading_hi);
  }
  return b;
}

Matrix idiosyncratic(Index dim, const ModelSpec& spec, double rho) {
  if (spec.model != 2) return 0.5 * Matrix::Identity(dim, dim);
  Matrix u(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) u(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return u;
}

}  // namespace

Correlations gen_correlations(const ModelSpec& spec, CounterRng& rng) {
  spec.validate();
  const Matrix b1 = loadings(spec.p, spec.l1, spec, rng);
  const Matrix b2 = loadings(spec.q, spec.l2, spec, rng);
  Correlations c;
  c.sigma1 = corr_from_cov(b1 * b1.transpose() + idiosyncratic(spec.p, spec, spec.rho1));
  c.sigma2 = corr_from_cov(b2 * b2.transpose() + idiosyncratic(spec.q, spec, spec.rho2));
  return c;
}

RoundGenerator::RoundGenerator(ModelSpec spec, Correlations corr) : spec_(std::move(spec)), corr_(std::move(corr)) {
  spec_.validate();
  mu_ = Matrix::Zero(spec_.p, spec_.q);
  mu_.topLeftCorner(spec_.signal.rows, spec_.signal.cols).setConstant(spec_.signal.amplitude);
  if (spec_.model == 3) {
    // Full-spectrum factors: left = (sqrt(lambda_i) nu_i), right = its
    // column-side counterpart transposed, so left left^T = sigma1 and
    // right^T right = sigma2.
    const EigenSystem e1 = sym_eigen(corr_.sigma1);
    const EigenSystem e2 = sym_eigen(corr_.sigma2);
    left_ = e1.vectors * e1.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    right_ = e2.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * e2.vectors.transpose();
  } else {
    left_ = sym_sqrt(corr_.sigma1);
    right_ = sym_sqrt(corr_.sigma2);
  }
}

TruthMask RoundGenerator::truth_mask() const {
  TruthMask mask = TruthMask::all(spec_.p, spec_.q, true);
  if (spec_.signal.amplitude != 0.0) {
    for (Index j = 0; j < spec_.signal.cols; ++j) {
      for (Index i = 0; i < spec_.signal.rows; ++i) mask.set(i, j, false);
    }
  }
  return mask;
}

Matrix RoundGenerator::draw(CounterRng& rng, bool treated) const {
  Matrix core(spec_.p, spec_.q);
  double* d = core.data();
  const Index total = core.size();
  if (spec_.model == 3) {
    for (Index k = 0; k < total; ++k) {
      d[k] = spec_.w_dist == WDist::exp1 ? rng.exponential() - 1.0 : std::sqrt(2.0 / 3.0) * rng.student_t(6);
    }
  } else {
    for (Index k = 0; k < total; ++k) d[k] = rng.normal();
  }
  Matrix out(spec_.p, spec_.q);
  if (treated) {
    out = mu_;
  } else {
    out.setZero();
  }
  out.noalias() += left_ * core * right_;
  return out;
}

std::pair<TwoSampleDataset, TruthMask> RoundGenerator::generate(std::uint64_t seed, std::size_t round) const {
  TwoSampleDataset ds;
  ds.treatment.resize(spec_.n);
  ds.control.resize(spec_.m);
  const auto total = static_cast<long long>(spec_.n + spec_.m);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long k = 0; k < total; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    CounterRng rng(seed, round + 1, idx);
    if (idx < spec_.n) {
      ds.treatment[idx] = draw(rng, true);
    } else {
      ds.control[idx - spec_.n] = draw(rng, false);
    }
  }
  return {std::move(ds), truth_mask()};
}

std::pair<TwoSampleDataset, TruthMask> gen_round(const ModelSpec& spec, const Correlations& corr,
                                                 std::uint64_t seed, std::size_t round) {
  return RoundGenerator(spec, corr).generate(seed, round);
}

const char* method_name(Method m) {
  switch (m) {
    case Method::noodle: return "noodle";
    case Method::sandwich: return "sandwich";
    case Method::pfa: return "pfa";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "noodle") return Method::noodle;
  if (name == "sandwich") return Method::sandwich;
  if (name == "pfa") return Method::pfa;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::vector<RoundRecord> evaluate_round(const TwoSampleDataset& ds, const TruthMask& mask,
                                        const std::vector<Method>& methods, double t,
                                        const EstimatorSpec& estimator, std::size_t round) {
  const TestMatrix tm = test_matrix(ds);
  const Matrix pv = p_values(tm);
  const FdpCount truth = true_fdp(pv, mask, t);

  std::optional<CorrEstimates> ce;
  auto corr = [&]() -> const CorrEstimates& {
    if (!ce) ce = estimate_correlations(ds, tm.sigma_hat);
    return *ce;
  };

  std::vector<RoundRecord> out;
  for (Method method : methods) {
    double est = 0.0;
    switch (method) {
      case Method::noodle:
        est = fdp_noodle(fit_noodle(tm, build_noodle_loadings(corr()), estimator), truth.rejections, t);
        break;
      case Method::sandwich:
        est = fdp_sandwich(fit_sandwich(tm, build_sandwich_loadings(corr()), estimator), truth.rejections, t);
        break;
      case Method::pfa:
        est = fdp_pfa(fit_pfa(ds, tm), truth.rejections, t);
        break;
    }
    out.push_back({round, method, est, truth.fdp, truth.rejections});
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.spec.validate();
  if (!(config.t > 0.0 && config.t < 1.0)) throw std::invalid_argument("threshold t must lie in (0, 1)");
  if (config.methods.empty()) throw std::invalid_argument("no methods requested");

  CounterRng design(config.seed, 0, 0);
  const RoundGenerator gen(config.spec, gen_correlations(config.spec, design));

  std::vector<std::vector<RoundRecord>> per_round(config.rounds);
  std::vector<std::string> errors(config.rounds);
  const auto rounds = static_cast<long long>(config.rounds);
  // Large rounds run one at a time and parallelize inside instead.
  const bool across_rounds = config.spec.p * config.spec.q <= 40000;
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count()) if (across_rounds)
  for (long long r = 0; r < rounds; ++r) {
    const auto idx = static_cast<std::size_t>(r);
    try {
      auto [ds, mask] = gen.generate(config.seed, idx);
      per_round[idx] = evaluate_round(ds, mask, config.methods, config.t, config.estimator, idx);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
      per_round[idx].clear();
    }
  }

  ExperimentResult result;
  std::map<Method, std::vector<double>> diffs;
  for (std::size_t r = 0; r < config.rounds; ++r) {
    if (!errors[r].empty()) {
      result.failures.push_back({r, errors[r]});
      continue;
    }
    for (const RoundRecord& rec : per_round[r]) {
      result.records.push_back(rec);
      diffs[rec.method].push_back(100.0 * (rec.fdp_hat - rec.fdp_true));
    }
  }
  for (Method method : config.methods) {
    const std::vector<double>& d = diffs[method];
    MethodSummary s;
    s.rounds = d.size();
    if (!d.empty()) {
      double sum = 0.0;
      for (double v : d) sum += v;
      s.bias_pct = sum / static_cast<double>(d.size());
      double ss = 0.0;
      for (double v : d) ss += (v - s.bias_pct) * (v - s.bias_pct);
      s.sd_pct = d.size() > 1 ? std::sqrt(ss / static_cast<double>(d.size() - 1)) : 0.0;
    }
    result.summary[method] = s;
  }
  return result;
}

}  // namespace matfdp
