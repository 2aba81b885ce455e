#ifndef MATFDP_COVFACTOR_HPP
#define MATFDP_COVFACTOR_HPP

#include <optional>
#include <span>
#include <vector>

#include "matfdp/loading_rows.hpp"
#include "matfdp/matcore.hpp"
#include "matfdp/teststats.hpp"

namespace matfdp {

// Squared loading-row norms are clamped to [0, 1 - kNormClamp] before the
// (1 - norm^2)^{-1/2} transform.
inline constexpr double kNormClamp = 1e-8;

inline double clamp_norm_sq(double v) { return v < 0.0 ? 0.0 : (v > 1.0 - kNormClamp ? 1.0 - kNormClamp : v); }

// Row-side (p x p) and column-side (q x q) pooled correlation estimates.
struct CorrEstimates {
  Matrix sigma1;
  Matrix sigma2;
  EigenSystem eig1;
  EigenSystem eig2;
  std::size_t sample_count = 0;  // n + m, drives the default factor limit

  // Wraps given correlation matrices (e.g. the true ones in a simulation).
  static CorrEstimates from_matrices(Matrix sigma1, Matrix sigma2, std::size_t sample_count);
};

CorrEstimates estimate_correlations(const TwoSampleDataset& ds, const Matrix& sigma_hat);

// floor(0.2 (n + m)), at least 1.
Index default_factor_limit(std::size_t sample_count);

// Eigenvalue-ratio estimator: the 1-based l in [1, l_max] maximizing
// values[l-1] / values[l]; the smallest such l on ties. Needs l_max + 1 values,
// all positive.
Index eigenvalue_ratio(std::span<const double> values, Index l_max);

// eigenvalue_ratio restricted to the leading values >= 1e-12 * values[0], with
// l_max capped to fit. Returns 0 when fewer than two usable values remain.
Index select_factor_count(std::span<const double> values, Index l_max);

struct NoodleLoadings {
  Index p = 0;
  Index q = 0;
  Index h = 0;
  std::vector<KronEntry> top;  // the h leading Kronecker eigenpairs
  Vector theta;                // their eigenvalues
  Matrix nu;                   // p x h, column k = nu_{i(k)}
  Matrix gamma;                // q x h, column k = gamma_{j(k)}
  Matrix row_norms_sq;         // p x q, clamped ||f_l||^2 for l = (i, j)

  // rho_k entry at cell (i, j): gamma_{j(k)}[j] * nu_{i(k)}[i].
  double rho(Index i, Index j, Index k) const { return gamma(j, k) * nu(i, k); }
};

NoodleLoadings build_noodle_loadings(const CorrEstimates& ce, std::optional<Index> h = std::nullopt);

struct SandwichLoadings {
  Index p = 0;
  Index q = 0;
  Index k1 = 0;
  Index k2 = 0;
  Vector lambda;   // k1 leading eigenvalues of sigma1
  Vector xi;       // k2 leading eigenvalues of sigma2
  Matrix nu;       // p x k1
  Matrix gamma;    // q x k2
  Matrix c_hat;    // p x k1, columns sqrt(lambda_b) nu_b
  Matrix d_hat_t;  // q x k2, columns sqrt(xi_a) gamma_a
  Vector col_part; // length p: sum_b lambda_b nu_b[i]^2
  Vector row_part; // length q: sum_a xi_a gamma_a[j]^2

  double norm_sq(Index i, Index j) const { return clamp_norm_sq(col_part(i) * row_part(j)); }
  Matrix row_norms_sq() const;
};

SandwichLoadings build_sandwich_loadings(const CorrEstimates& ce, std::optional<Index> k1 = std::nullopt,
                                         std::optional<Index> k2 = std::nullopt);

// Row l = (i, j) of F = (sqrt(theta_k) rho_k).
class NoodleRows final : public LoadingRows {
 public:
  explicit NoodleRows(const NoodleLoadings& nl) : nl_(nl), sqrt_theta_(nl.theta.cwiseMax(0.0).cwiseSqrt()) {}
  Index count() const override { return nl_.p * nl_.q; }
  Index width() const override { return nl_.h; }
  void row(Index l, std::span<double> out) const override;

 private:
  const NoodleLoadings& nl_;
  Vector sqrt_theta_;
};

// Row l = (i, j) of D^T (x) C; column a * k1 + b holds d_hat_t(j, a) * c_hat(i, b).
class SandwichRows final : public LoadingRows {
 public:
  explicit SandwichRows(const SandwichLoadings& sl) : sl_(sl) {}
  Index count() const override { return sl_.p * sl_.q; }
  Index width() const override { return sl_.k1 * sl_.k2; }
  void row(Index l, std::span<double> out) const override;

 private:
  const SandwichLoadings& sl_;
};

}  // namespace matfdp

#endif  // MATFDP_COVFACTOR_HPP
