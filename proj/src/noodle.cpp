#include "matfdp/noodle.hpp"

#include <cmath>

#include "matfdp/errors.hpp"
#include "matfdp/trimreg.hpp"

namespace matfdp {

Matrix noodle_shift(const NoodleLoadings& nl, const Vector& w) {
  // sum_k sqrt(theta_k) w_k nu_{i(k)} gamma_{j(k)}^T
  const Vector coef = nl.theta.cwiseMax(0.0).cwiseSqrt().cwiseProduct(w);
  return nl.nu * coef.asDiagonal() * nl.gamma.transpose();
}

NoodleFit fit_noodle(const TestMatrix& tm, NoodleLoadings nl, EstimatorSpec estimator) {
  if (tm.x.rows() != nl.p || tm.x.cols() != nl.q) {
    throw InvalidMatrix("fit_noodle: loadings and test matrix dimensions differ");
  }
  NoodleFit fit;
  fit.loadings = std::move(nl);
  const NoodleLoadings& L = fit.loadings;
  if (L.h == 0) {
    fit.w_hat = Vector();
    fit.zeta_hat = Matrix::Zero(L.p, L.q);
    return fit;
  }

  if (estimator.kind == FactorEstimator::least_squares) {
    // F^T F = diag(theta), so W_k = theta_k^{-1/2} rho_k^T vec(X) and
    // zeta = sum_k rho_k (rho_k^T vec(X)).
    // Columns with theta_k <= 0 are zero and drop out (pseudo-inverse).
    Vector proj = (L.nu.transpose() * tm.x * L.gamma).diagonal();
    const Vector inv = L.theta.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
    proj = proj.cwiseProduct(L.theta.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    fit.w_hat = proj.cwiseProduct(inv);
    fit.zeta_hat = L.nu * proj.asDiagonal() * L.gamma.transpose();
  } else {
    const NoodleRows rows(L);
    const auto tf = trimmed_l1_fit(std::span<const double>(tm.x.data(), static_cast<std::size_t>(tm.x.size())),
                                   rows, TrimSpec{estimator.trim_fraction});
    fit.w_hat = tf.w;
    fit.fell_back = tf.fell_back;
    fit.zeta_hat = noodle_shift(L, fit.w_hat);
  }
  return fit;
}

namespace {

double noodle_plugin(const Matrix& norms_sq, const Matrix& shift, std::size_t rejections, double t,
                     std::span<const unsigned char> include) {
  const Matrix coef = inflation_coefficients(norms_sq);
  const auto n = static_cast<std::size_t>(coef.size());
  return plugin_fdp(std::span<const double>(coef.data(), n), std::span<const double>(shift.data(), n), rejections,
                    t, include);
}

}  // namespace

double fdp_noodle(const NoodleFit& fit, std::size_t rejections, double t) {
  return noodle_plugin(fit.loadings.row_norms_sq, fit.zeta_hat, rejections, t, {});
}

double fdp_oracle_noodle(const NoodleLoadings& truth, const Vector& w, const TruthMask& mask,
                         std::size_t rejections, double t) {
  if (mask.rows != truth.p || mask.cols != truth.q) {
    throw InvalidMatrix("fdp_oracle_noodle: mask shape does not match the loadings");
  }
  const Matrix zeta = truth.h == 0 ? Matrix::Zero(truth.p, truth.q) : noodle_shift(truth, w);
  return noodle_plugin(truth.row_norms_sq, zeta, rejections, t, mask.is_null);
}

}  // namespace matfdp
