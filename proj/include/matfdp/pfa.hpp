#ifndef MATFDP_PFA_HPP
#define MATFDP_PFA_HPP

#include <cstddef>
#include <optional>

#include "matfdp/matcore.hpp"
#include "matfdp/teststats.hpp"

namespace matfdp {

// S = F F^T for F = (n + m - 2)^{-1/2} (centered vec observations). The
// eigenpairs of S come from the (n + m) x (n + m) Gram matrix F^T F.
struct ThinFactor {
  Matrix f;             // (pq) x (n + m)
  Vector values;        // nonzero eigenvalues of S, non-increasing
  Matrix gram_vectors;  // (n + m) x values.size(), eigenvectors of F^T F

  // The leading `count` unit eigenvectors of S, F u / sqrt(s), as columns.
  Matrix eigenvectors(Index count) const;
};

// Cutoff below which Gram eigenvalues count as numerical zeros, relative to
// max(1, largest eigenvalue).
inline constexpr double kGramCutoff = 1e-12;

ThinFactor build_thin_factor(const TwoSampleDataset& ds);

// Same, with every centered observation divided elementwise by sigma_hat so
// that S is on the correlation scale.
ThinFactor build_standardized_thin_factor(const TwoSampleDataset& ds, const Matrix& sigma_hat);

ThinFactor thin_factor_from_columns(Matrix f);

struct PfaFit {
  Index h = 0;
  Vector values;        // length h
  Matrix vectors;       // (pq) x h
  Vector w_hat;         // length h
  Vector zeta_hat;      // length pq
  Vector row_norms_sq;  // length pq, clamped
};

PfaFit fit_pfa(const TwoSampleDataset& ds, const TestMatrix& tm, std::optional<Index> h = std::nullopt);

double fdp_pfa(const PfaFit& fit, std::size_t rejections, double t);

// Convenience: fit and evaluate at t with R(t) taken from the test matrix.
double fdp_pfa(const TwoSampleDataset& ds, const TestMatrix& tm, double t, std::optional<Index> h = std::nullopt);

}  // namespace matfdp

#endif  // MATFDP_PFA_HPP
