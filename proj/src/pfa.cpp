#include "matfdp/pfa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matfdp/covfactor.hpp"
#include "matfdp/errors.hpp"
#include "matfdp/fdp_plugin.hpp"
#include "matfdp/kernels.hpp"
#include "matfdp/parallel.hpp"

namespace matfdp {
namespace {

Matrix centered_columns(const TwoSampleDataset& ds, const Matrix* inv_sigma) {
  ds.validate();
  const Index p = ds.rows();
  const Index q = ds.cols();
  const Index pq = p * q;
  const auto total = static_cast<Index>(ds.total());
  Matrix mean_y = Matrix::Zero(p, q);
  Matrix mean_z = Matrix::Zero(p, q);
  for (const Matrix& y : ds.treatment) mean_y += y;
  for (const Matrix& z : ds.control) mean_z += z;
  mean_y /= static_cast<double>(ds.n());
  mean_z /= static_cast<double>(ds.m());

  const double scale = 1.0 / std::sqrt(static_cast<double>(total) - 2.0);
  Matrix f(pq, total);
  const auto n = static_cast<Index>(ds.n());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index c = 0; c < total; ++c) {
    const bool treated = c < n;
    const Matrix& obs = treated ? ds.treatment[static_cast<std::size_t>(c)]
                                : ds.control[static_cast<std::size_t>(c - n)];
    const Matrix& mean = treated ? mean_y : mean_z;
    if (inv_sigma) {
      f.col(c) = ((obs - mean).cwiseProduct(*inv_sigma)).reshaped() * scale;
    } else {
      f.col(c) = (obs - mean).reshaped() * scale;
    }
  }
  return f;
}

}  // namespace

ThinFactor thin_factor_from_columns(Matrix f) {
  ThinFactor tf;
  tf.f = std::move(f);
  const Matrix g = kernels::omp::gram(tf.f);
  const EigenSystem es = sym_eigen(g);
  const double cut = kGramCutoff * std::max(1.0, es.values.size() ? es.values(0) : 0.0);
  Index r = 0;
  while (r < es.size() && es.values(r) > cut) ++r;
  tf.values = es.values.head(r);
  tf.gram_vectors = es.vectors.leftCols(r);
  return tf;
}

Matrix ThinFactor::eigenvectors(Index count) const {
  if (count > values.size()) throw InvalidFactorCount("ThinFactor: requested more eigenvectors than the rank");
  Matrix u = f * gram_vectors.leftCols(count);
  for (Index k = 0; k < count; ++k) u.col(k) /= std::sqrt(values(k));
  return u;
}

ThinFactor build_thin_factor(const TwoSampleDataset& ds) { return thin_factor_from_columns(centered_columns(ds, nullptr)); }

ThinFactor build_standardized_thin_factor(const TwoSampleDataset& ds, const Matrix& sigma_hat) {
  const Matrix inv = sigma_hat.cwiseInverse();
  return thin_factor_from_columns(centered_columns(ds, &inv));
}

PfaFit fit_pfa(const TwoSampleDataset& ds, const TestMatrix& tm, std::optional<Index> h) {
  const ThinFactor tf = build_standardized_thin_factor(ds, tm.sigma_hat);
  const Index rank = tf.values.size();
  Index count = 0;
  if (h) {
    count = *h;
    if (count < 0 || count > rank) {
      throw InvalidFactorCount("PFA factor count " + std::to_string(count) + " exceeds the rank " +
                               std::to_string(rank));
    }
  } else {
    count = select_factor_count(std::span<const double>(tf.values.data(), static_cast<std::size_t>(rank)),
                                default_factor_limit(ds.total()));
  }

  PfaFit fit;
  fit.h = count;
  fit.values = tf.values.head(count);
  fit.vectors = tf.eigenvectors(count);
  const Vector x = tm.x.reshaped();
  const Vector proj = fit.vectors.transpose() * x;
  fit.w_hat = proj.cwiseQuotient(fit.values.cwiseSqrt());
  fit.zeta_hat = fit.vectors * proj;
  fit.row_norms_sq = (fit.vectors.array().square().matrix() * fit.values)
                         .unaryExpr([](double v) { return clamp_norm_sq(v); });
  if (count == 0) {
    fit.zeta_hat = Vector::Zero(x.size());
    fit.row_norms_sq = Vector::Zero(x.size());
  }
  return fit;
}

double fdp_pfa(const PfaFit& fit, std::size_t rejections, double t) {
  const Vector coef = (1.0 - fit.row_norms_sq.array()).rsqrt().matrix();
  const auto n = static_cast<std::size_t>(coef.size());
  return plugin_fdp(std::span<const double>(coef.data(), n), std::span<const double>(fit.zeta_hat.data(), n),
                    rejections, t);
}

double fdp_pfa(const TwoSampleDataset& ds, const TestMatrix& tm, double t, std::optional<Index> h) {
  const std::size_t r = rejection_count(p_values(tm), t);
  return fdp_pfa(fit_pfa(ds, tm, h), r, t);
}

}  // namespace matfdp
