#include "matfdp/covfactor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matfdp/errors.hpp"
#include "matfdp/kernels.hpp"

namespace matfdp {

CorrEstimates CorrEstimates::from_matrices(Matrix sigma1, Matrix sigma2, std::size_t sample_count) {
  CorrEstimates ce;
  ce.eig1 = sym_eigen(sigma1);
  ce.eig2 = sym_eigen(sigma2);
  ce.sigma1 = std::move(sigma1);
  ce.sigma2 = std::move(sigma2);
  ce.sample_count = sample_count;
  return ce;
}

CorrEstimates estimate_correlations(const TwoSampleDataset& ds, const Matrix& sigma_hat) {
  ds.validate();
  const Index p = ds.rows();
  const Index q = ds.cols();
  if (sigma_hat.rows() != p || sigma_hat.cols() != q) {
    throw InvalidMatrix("estimate_correlations: sigma_hat shape does not match the dataset");
  }
  for (Index j = 0; j < q; ++j) {
    for (Index i = 0; i < p; ++i) {
      if (!(sigma_hat(i, j) > 0.0)) {
        throw DegenerateVariance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }

  Matrix mean_y = Matrix::Zero(p, q);
  Matrix mean_z = Matrix::Zero(p, q);
  for (const Matrix& y : ds.treatment) mean_y += y;
  for (const Matrix& z : ds.control) mean_z += z;
  mean_y /= static_cast<double>(ds.n());
  mean_z /= static_cast<double>(ds.m());

  const Matrix inv_sigma = sigma_hat.cwiseInverse();
  auto sums = kernels::omp::correlation_sums(ds.treatment, ds.control, mean_y, mean_z, inv_sigma);
  const double df = static_cast<double>(ds.total()) - 2.0;
  sums.row_side /= df * static_cast<double>(q);
  sums.col_side /= df * static_cast<double>(p);
  return CorrEstimates::from_matrices(std::move(sums.row_side), std::move(sums.col_side), ds.total());
}

Index default_factor_limit(std::size_t sample_count) {
  const auto l = static_cast<Index>(std::floor(0.2 * static_cast<double>(sample_count)));
  return std::max<Index>(l, 1);
}

Index eigenvalue_ratio(std::span<const double> values, Index l_max) {
  if (l_max < 1) throw InvalidFactorCount("eigenvalue_ratio: l_max must be >= 1");
  if (values.size() < static_cast<std::size_t>(l_max) + 1) {
    throw InvalidFactorCount("eigenvalue_ratio: need l_max + 1 eigenvalues");
  }
  for (Index l = 0; l <= l_max; ++l) {
    if (!(values[static_cast<std::size_t>(l)] > 0.0)) {
      throw NonPositiveEigenvalue("eigenvalue_ratio: eigenvalue " + std::to_string(l + 1) + " is not positive");
    }
  }
  Index best = 1;
  double best_ratio = values[0] / values[1];
  for (Index l = 2; l <= l_max; ++l) {
    const double r = values[static_cast<std::size_t>(l - 1)] / values[static_cast<std::size_t>(l)];
    if (r > best_ratio) {
      best_ratio = r;
      best = l;
    }
  }
  return best;
}

Index select_factor_count(std::span<const double> values, Index l_max) {
  if (values.empty() || !(values[0] > 0.0)) return 0;
  const double floor = 1e-12 * values[0];
  std::size_t usable = 0;
  while (usable < values.size() && values[usable] >= floor) ++usable;
  const Index cap = std::min<Index>(l_max, static_cast<Index>(usable) - 1);
  if (cap < 1) return 0;
  return eigenvalue_ratio(values.first(static_cast<std::size_t>(cap) + 1), cap);
}

NoodleLoadings build_noodle_loadings(const CorrEstimates& ce, std::optional<Index> h) {
  const Index p = ce.eig1.size();
  const Index q = ce.eig2.size();
  const KronEigenIndex index = kron_eigenpairs(ce.eig1, ce.eig2);

  Index count = 0;
  if (h) {
    count = *h;
  } else {
    std::vector<double> values(index.size());
    for (std::size_t k = 0; k < index.size(); ++k) values[k] = index[k].value;
    count = select_factor_count(values, default_factor_limit(ce.sample_count));
  }
  if (count < 0 || count > p * q) {
    throw InvalidFactorCount("noodle factor count " + std::to_string(count) + " outside [0, " +
                             std::to_string(p * q) + "]");
  }

  NoodleLoadings nl;
  nl.p = p;
  nl.q = q;
  nl.h = count;
  nl.top.assign(index.entries.begin(), index.entries.begin() + count);
  nl.theta.resize(count);
  nl.nu.resize(p, count);
  nl.gamma.resize(q, count);
  for (Index k = 0; k < count; ++k) {
    const KronEntry& e = nl.top[static_cast<std::size_t>(k)];
    nl.theta(k) = e.value;
    nl.nu.col(k) = ce.eig1.vectors.col(e.i);
    nl.gamma.col(k) = ce.eig2.vectors.col(e.j);
  }
  // ||f_l||^2 = sum_k theta_k nu_{i(k)}[i]^2 gamma_{j(k)}[j]^2.
  const Matrix nu_sq = nl.nu.array().square().matrix();
  const Matrix gamma_sq = nl.gamma.array().square().matrix();
  nl.row_norms_sq = nu_sq * nl.theta.asDiagonal() * gamma_sq.transpose();
  nl.row_norms_sq = nl.row_norms_sq.unaryExpr([](double v) { return clamp_norm_sq(v); });
  if (count == 0) nl.row_norms_sq = Matrix::Zero(p, q);
  return nl;
}

Matrix SandwichLoadings::row_norms_sq() const {
  Matrix out(p, q);
  for (Index j = 0; j < q; ++j) {
    for (Index i = 0; i < p; ++i) out(i, j) = norm_sq(i, j);
  }
  return out;
}

SandwichLoadings build_sandwich_loadings(const CorrEstimates& ce, std::optional<Index> k1,
                                         std::optional<Index> k2) {
  const Index p = ce.eig1.size();
  const Index q = ce.eig2.size();
  const Index limit = default_factor_limit(ce.sample_count);
  const Index r1 = k1 ? *k1
                      : select_factor_count(std::span<const double>(ce.eig1.values.data(), static_cast<std::size_t>(p)), limit);
  const Index r2 = k2 ? *k2
                      : select_factor_count(std::span<const double>(ce.eig2.values.data(), static_cast<std::size_t>(q)), limit);
  if (r1 < 0 || r1 > p || r2 < 0 || r2 > q) {
    throw InvalidFactorCount("sandwich factor counts (" + std::to_string(r1) + ", " + std::to_string(r2) +
                             ") outside [0, " + std::to_string(p) + "] x [0, " + std::to_string(q) + "]");
  }

  SandwichLoadings sl;
  sl.p = p;
  sl.q = q;
  sl.k1 = r1;
  sl.k2 = r2;
  sl.lambda = ce.eig1.values.head(r1);
  sl.xi = ce.eig2.values.head(r2);
  sl.nu = ce.eig1.vectors.leftCols(r1);
  sl.gamma = ce.eig2.vectors.leftCols(r2);
  sl.c_hat = sl.nu * sl.lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  sl.d_hat_t = sl.gamma * sl.xi.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  sl.col_part = sl.c_hat.array().square().rowwise().sum().matrix();
  sl.row_part = sl.d_hat_t.array().square().rowwise().sum().matrix();
  return sl;
}

void NoodleRows::row(Index l, std::span<double> out) const {
  const Index i = l % nl_.p;
  const Index j = l / nl_.p;
  for (Index k = 0; k < nl_.h; ++k) out[static_cast<std::size_t>(k)] = sqrt_theta_(k) * nl_.rho(i, j, k);
}

void SandwichRows::row(Index l, std::span<double> out) const {
  const Index i = l % sl_.p;
  const Index j = l / sl_.p;
  for (Index a = 0; a < sl_.k2; ++a) {
    const double d = sl_.d_hat_t(j, a);
    for (Index b = 0; b < sl_.k1; ++b) out[static_cast<std::size_t>(a * sl_.k1 + b)] = d * sl_.c_hat(i, b);
  }
}

}  // namespace matfdp
