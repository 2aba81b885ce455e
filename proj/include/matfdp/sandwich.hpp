#ifndef MATFDP_SANDWICH_HPP
#define MATFDP_SANDWICH_HPP

#include <cstddef>

#include "matfdp/covfactor.hpp"
#include "matfdp/fdp_plugin.hpp"
#include "matfdp/teststats.hpp"

namespace matfdp {

// Two-sided factor fit X ~ C W D. Everything flows through the p x k1 and
// q x k2 factors; D^T (x) C is never formed.
struct SandwichFit {
  SandwichLoadings loadings;
  Matrix w_hat;    // k1 x k2
  Matrix eta_hat;  // p x q
  Matrix d_hat;    // p x q, (1 - ||b_l||^2)^{-1/2}
  bool fell_back = false;
};

SandwichFit fit_sandwich(const TestMatrix& tm, SandwichLoadings sl, EstimatorSpec estimator = {});

// P1 X P2 with P1 = nu nu^T and P2 = gamma gamma^T, evaluated as
// nu (nu^T X gamma) gamma^T.
Matrix sandwich_projection(const SandwichLoadings& sl, const Matrix& x);

double fdp_sandwich(const SandwichFit& fit, std::size_t rejections, double t);

// True-quantity version restricted to nulls. w_tilde is the k1 x k2 realized
// factor matrix; eta = C w_tilde D.
double fdp_oracle_sandwich(const SandwichLoadings& truth, const Matrix& w_tilde, const TruthMask& mask,
                           std::size_t rejections, double t);

}  // namespace matfdp

#endif  // MATFDP_SANDWICH_HPP
