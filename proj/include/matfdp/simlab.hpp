#ifndef MATFDP_SIMLAB_HPP
#define MATFDP_SIMLAB_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "matfdp/fdp_plugin.hpp"
#include "matfdp/matcore.hpp"
#include "matfdp/rng.hpp"
#include "matfdp/teststats.hpp"

namespace matfdp {

enum class LoadingDist { std_normal, uniform };
enum class WDist { exp1, scaled_t6 };

struct SignalSpec {
  Index rows = 8;
  Index cols = 25;
  double amplitude = 1.0;
};

// Simulation design. Models 1 and 2 draw matrix-normal data with correlation
// matrices corr(B B^T + Sigma_u); model 3 replaces the Gaussian core with
// i.i.d. non-normal entries.
struct ModelSpec {
  int model = 1;
  Index p = 100;
  Index q = 100;
  std::size_t n = 50;
  std::size_t m = 50;
  Index l1 = 2;
  Index l2 = 4;
  LoadingDist loading_dist = LoadingDist::uniform;
  double loading_lo = -1.0;
  double loading_hi = 1.0;
  double rho1 = 0.5;  // model 2 only
  double rho2 = 0.3;  // model 2 only
  WDist w_dist = WDist::exp1;  // model 3 only
  SignalSpec signal;

  void validate() const;

  // Named settings: model 1 "a" = f(2,4) B~U(-1,1), "b" = f(3,3) B~N(0,1);
  // model 2 "a" = (0.5, 0.3), "b" = (0.5, 0.8); model 3 "<l1><l2>-exp" or
  // "<l1><l2>-t6" with l1 l2 in {22, 33, 44, 24}.
  static ModelSpec preset(int model, const std::string& setting);
};

struct Correlations {
  Matrix sigma1;
  Matrix sigma2;
};

Correlations gen_correlations(const ModelSpec& spec, CounterRng& rng);

// Reusable per-experiment generator: square roots / eigen factors of the
// correlation matrices are computed once.
class RoundGenerator {
 public:
  RoundGenerator(ModelSpec spec, Correlations corr);

  // Observation k of a round uses stream k of (seed, round + 1), so rounds and
  // observations can be generated in any order.
  std::pair<TwoSampleDataset, TruthMask> generate(std::uint64_t seed, std::size_t round) const;

  const ModelSpec& spec() const { return spec_; }
  const Correlations& correlations() const { return corr_; }
  TruthMask truth_mask() const;

 private:
  Matrix draw(CounterRng& rng, bool treated) const;

  ModelSpec spec_;
  Correlations corr_;
  Matrix mu_;
  Matrix left_;   // p x p
  Matrix right_;  // q x q
};

std::pair<TwoSampleDataset, TruthMask> gen_round(const ModelSpec& spec, const Correlations& corr,
                                                 std::uint64_t seed, std::size_t round);

enum class Method { noodle, sandwich, pfa };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct ExperimentConfig {
  ModelSpec spec;
  std::vector<Method> methods{Method::noodle, Method::sandwich, Method::pfa};
  double t = 0.001;
  std::size_t rounds = 100;
  std::uint64_t seed = 1;
  EstimatorSpec estimator = EstimatorSpec::trimmed();
};

struct RoundRecord {
  std::size_t round = 0;
  Method method = Method::noodle;
  double fdp_hat = 0.0;  // raw, unclamped
  double fdp_true = 0.0;
  std::size_t rejections = 0;
};

struct MethodSummary {
  double bias_pct = 0.0;
  double sd_pct = 0.0;
  std::size_t rounds = 0;
};

struct RoundFailure {
  std::size_t round = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<RoundRecord> records;  // ordered by round, then method order
  std::map<Method, MethodSummary> summary;
  std::vector<RoundFailure> failures;
};

// Evaluates every requested method on one dataset.
std::vector<RoundRecord> evaluate_round(const TwoSampleDataset& ds, const TruthMask& mask,
                                        const std::vector<Method>& methods, double t,
                                        const EstimatorSpec& estimator, std::size_t round);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace matfdp

#endif  // MATFDP_SIMLAB_HPP
