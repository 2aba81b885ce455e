#include <doctest.h>

#include "matfdp/covfactor.hpp"
#include "matfdp/normal.hpp"
#include "matfdp/noodle.hpp"
#include "oracles.hpp"

using namespace matfdp;

namespace {

TestMatrix from_x(const Matrix& x) { return TestMatrix{x, Matrix::Ones(x.rows(), x.cols()), 1.0}; }

Matrix explicit_f(const CorrEstimates& ce, const NoodleLoadings& nl) {
  Matrix f(nl.p * nl.q, nl.h);
  for (Index k = 0; k < nl.h; ++k) {
    const KronEntry& e = nl.top[static_cast<std::size_t>(k)];
    f.col(k) = std::sqrt(e.value) * oracle::kron_vec(ce.eig2.vectors.col(e.j), ce.eig1.vectors.col(e.i));
  }
  return f;
}

CorrEstimates random_pair(Index p, Index q, std::mt19937_64& gen) {
  return CorrEstimates::from_matrices(oracle::random_corr(p, gen), oracle::random_corr(q, gen), 40);
}

Vector coefs(const Matrix& norms_sq) {
  Vector c(norms_sq.size());
  for (Index l = 0; l < c.size(); ++l) c(l) = 1.0 / std::sqrt(1.0 - norms_sq.data()[l]);
  return c;
}

}  // namespace

TEST_CASE("h = 0 gives an empty factor and zero shift") {
  const auto ce = CorrEstimates::from_matrices(Matrix::Identity(3, 3), Matrix::Identity(2, 2), 10);
  std::mt19937_64 gen(51);
  const NoodleFit fit = fit_noodle(from_x(oracle::gaussian(3, 2, gen)), build_noodle_loadings(ce, 0));
  CHECK(fit.w_hat.size() == 0);
  CHECK(fit.zeta_hat.cwiseAbs().maxCoeff() == 0.0);
  const NoodleFit trimmed = fit_noodle(from_x(oracle::gaussian(3, 2, gen)), build_noodle_loadings(ce, 0),
                                       EstimatorSpec::trimmed());
  CHECK(trimmed.zeta_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a statistic inside the factor span is reproduced exactly") {
  std::mt19937_64 gen(52);
  const auto ce = random_pair(4, 3, gen);
  const NoodleLoadings nl = build_noodle_loadings(ce, 1);
  const Matrix f = explicit_f(ce, nl);
  const Matrix x = Eigen::Map<const Matrix>(f.col(0).data(), 4, 3);
  for (const EstimatorSpec est : {EstimatorSpec::least_squares(), EstimatorSpec::trimmed(1.0)}) {
    const NoodleFit fit = fit_noodle(from_x(x), nl, est);
    CHECK(fit.w_hat(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK((fit.zeta_hat - x).cwiseAbs().maxCoeff() < 1e-6);
  }
  const NoodleFit ls = fit_noodle(from_x(x), nl);
  CHECK((ls.zeta_hat - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("least-squares shift equals the dense projection F (F^T F)^-1 F^T vec(X)") {
  std::mt19937_64 gen(53);
  for (int trial = 0; trial < 25; ++trial) {
    const Index p = 1 + trial % 6, q = 1 + (trial / 6) % 6;
    const auto ce = random_pair(p, q, gen);
    const Index h = std::min<Index>(p * q, 1 + trial % 5);
    const NoodleLoadings nl = build_noodle_loadings(ce, h);
    const Matrix f = explicit_f(ce, nl);
    const Matrix x = oracle::gaussian(p, q, gen);
    const NoodleFit fit = fit_noodle(from_x(x), nl);
    const Vector zeta = oracle::ls_projection(f, oracle::vec(x));
    CHECK((oracle::vec(fit.zeta_hat) - zeta).cwiseAbs().maxCoeff() < 1e-10);
    const Vector w = (f.transpose() * f).ldlt().solve(f.transpose() * oracle::vec(x));
    CHECK((fit.w_hat - w).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, w.cwiseAbs().maxCoeff()));
    CHECK((noodle_shift(nl, fit.w_hat) - fit.zeta_hat).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("trimmed shift is F w for the explicit F") {
  std::mt19937_64 gen(54);
  const auto ce = random_pair(5, 6, gen);
  const NoodleLoadings nl = build_noodle_loadings(ce, 3);
  const Matrix f = explicit_f(ce, nl);
  Matrix x = oracle::gaussian(5, 6, gen);
  x(0, 0) += 8;
  x(1, 2) -= 7;
  const NoodleFit fit = fit_noodle(from_x(x), nl, EstimatorSpec::trimmed(0.9));
  CHECK((oracle::vec(fit.zeta_hat) - f * fit.w_hat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("independent case: pq t / R") {
  const auto ce = CorrEstimates::from_matrices(Matrix::Identity(4, 4), Matrix::Identity(5, 5), 10);
  std::mt19937_64 gen(55);
  const NoodleFit fit = fit_noodle(from_x(oracle::gaussian(4, 5, gen)), build_noodle_loadings(ce, 0));
  for (double t : {0.001, 0.01, 0.2}) {
    for (std::size_t r : {1u, 3u, 17u}) {
      CHECK(fdp_noodle(fit, r, t) == doctest::Approx(20.0 * t / static_cast<double>(r)).epsilon(1e-12));
    }
  }
  CHECK(fdp_noodle(fit, 0, 0.01) == 0.0);
}

TEST_CASE("plug-in estimate matches the brute-force sum") {
  std::mt19937_64 gen(56);
  for (int trial = 0; trial < 10; ++trial) {
    const Index p = 2 + trial % 5, q = 3 + trial % 4;
    const auto ce = random_pair(p, q, gen);
    const NoodleFit fit = fit_noodle(from_x(oracle::gaussian(p, q, gen)), build_noodle_loadings(ce, 2));
    const double t = 0.05;
    const double z = norm_quantile(t / 2);
    const double expect = oracle::plugin(coefs(fit.loadings.row_norms_sq), oracle::vec(fit.zeta_hat), z, 5);
    CHECK(fdp_noodle(fit, 5, t) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("FDP_hat * R is non-decreasing in t") {
  std::mt19937_64 gen(57);
  const auto ce = random_pair(6, 5, gen);
  const NoodleFit fit = fit_noodle(from_x(2.0 * oracle::gaussian(6, 5, gen)), build_noodle_loadings(ce, 3));
  double prev = 0.0;
  for (double t = 1e-5; t < 0.9; t *= 1.7) {
    const double v = fdp_noodle(fit, 1000, t) * 1000;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("oracle estimate: empty mask, independent case, full mask, upper bound") {
  std::mt19937_64 gen(58);
  const auto id = CorrEstimates::from_matrices(Matrix::Identity(3, 3), Matrix::Identity(4, 4), 10);
  const NoodleLoadings none = build_noodle_loadings(id, 0);
  TruthMask mask = TruthMask::all(3, 4, true);
  mask.set(0, 0, false);
  mask.set(2, 3, false);
  CHECK(fdp_oracle_noodle(none, Vector(), TruthMask::all(3, 4, false), 4, 0.01) == 0.0);
  CHECK(fdp_oracle_noodle(none, Vector(), mask, 4, 0.01) == doctest::Approx(10 * 0.01 / 4).epsilon(1e-12));

  for (int trial = 0; trial < 10; ++trial) {
    const Index p = 2 + trial % 4, q = 2 + trial % 3;
    const auto ce = random_pair(p, q, gen);
    const NoodleLoadings nl = build_noodle_loadings(ce, 2);
    const Vector w = oracle::gaussian(2, 1, gen);
    const Matrix f = explicit_f(ce, nl);
    const double t = 0.01;
    const double z = norm_quantile(t / 2);
    const double full = oracle::plugin(coefs(nl.row_norms_sq), f * w, z, 3);
    CHECK(fdp_oracle_noodle(nl, w, TruthMask::all(p, q, true), 3, t) == doctest::Approx(full).epsilon(1e-12));
    TruthMask m = TruthMask::all(p, q, true);
    for (Index i = 0; i < p; i += 2) m.set(i, 0, false);
    const double partial = fdp_oracle_noodle(nl, w, m, 3, t);
    CHECK(partial <= fdp_oracle_noodle(nl, w, TruthMask::all(p, q, true), 3, t));
    CHECK(partial == doctest::Approx(oracle::plugin(coefs(nl.row_norms_sq), f * w, z, 3, m.is_null)).epsilon(1e-12));
  }
}
