#include "matfdp/sandwich.hpp"

#include <cmath>

#include "matfdp/errors.hpp"
#include "matfdp/trimreg.hpp"

namespace matfdp {

Matrix sandwich_projection(const SandwichLoadings& sl, const Matrix& x) {
  if (sl.k1 == 0 || sl.k2 == 0) return Matrix::Zero(x.rows(), x.cols());
  const Matrix core = sl.nu.transpose() * x * sl.gamma;
  return sl.nu * core * sl.gamma.transpose();
}

SandwichFit fit_sandwich(const TestMatrix& tm, SandwichLoadings sl, EstimatorSpec estimator) {
  if (tm.x.rows() != sl.p || tm.x.cols() != sl.q) {
    throw InvalidMatrix("fit_sandwich: loadings and test matrix dimensions differ");
  }
  SandwichFit fit;
  fit.loadings = std::move(sl);
  const SandwichLoadings& L = fit.loadings;
  fit.d_hat = inflation_coefficients(L.row_norms_sq());

  if (L.k1 == 0 || L.k2 == 0) {
    fit.w_hat = Matrix::Zero(L.k1, L.k2);
    fit.eta_hat = Matrix::Zero(L.p, L.q);
    return fit;
  }

  if (estimator.kind == FactorEstimator::least_squares) {
    // (B^T B)^{-1} B^T vec(X) with B = D^T (x) C reduces to
    // diag(lambda)^{-1/2} nu^T X gamma diag(xi)^{-1/2}.
    // Non-positive eigenvalues give zero columns and drop out (pseudo-inverse).
    auto inv_sqrt = [](const Vector& v) {
      return v.unaryExpr([](double x) { return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0; }).eval();
    };
    auto keep = [](const Vector& v) { return v.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }).eval(); };
    const Matrix core = keep(L.lambda).asDiagonal() * (L.nu.transpose() * tm.x * L.gamma) * keep(L.xi).asDiagonal();
    fit.w_hat = inv_sqrt(L.lambda).asDiagonal() * core * inv_sqrt(L.xi).asDiagonal();
    fit.eta_hat = L.nu * core * L.gamma.transpose();
  } else {
    const SandwichRows rows(L);
    const auto tf = trimmed_l1_fit(std::span<const double>(tm.x.data(), static_cast<std::size_t>(tm.x.size())),
                                   rows, TrimSpec{estimator.trim_fraction});
    fit.w_hat = tf.w.reshaped(L.k1, L.k2);
    fit.fell_back = tf.fell_back;
    fit.eta_hat = L.c_hat * fit.w_hat * L.d_hat_t.transpose();
  }
  return fit;
}

double fdp_sandwich(const SandwichFit& fit, std::size_t rejections, double t) {
  const auto n = static_cast<std::size_t>(fit.d_hat.size());
  return plugin_fdp(std::span<const double>(fit.d_hat.data(), n), std::span<const double>(fit.eta_hat.data(), n),
                    rejections, t);
}

double fdp_oracle_sandwich(const SandwichLoadings& truth, const Matrix& w_tilde, const TruthMask& mask,
                           std::size_t rejections, double t) {
  if (mask.rows != truth.p || mask.cols != truth.q) {
    throw InvalidMatrix("fdp_oracle_sandwich: mask shape does not match the loadings");
  }
  const Matrix coef = inflation_coefficients(truth.row_norms_sq());
  const Matrix eta = (truth.k1 == 0 || truth.k2 == 0) ? Matrix::Zero(truth.p, truth.q)
                                                      : Matrix(truth.c_hat * w_tilde * truth.d_hat_t.transpose());
  const auto n = static_cast<std::size_t>(coef.size());
  return plugin_fdp(std::span<const double>(coef.data(), n), std::span<const double>(eta.data(), n), rejections, t,
                    mask.is_null);
}

}  // namespace matfdp
