#ifndef MATFDP_NOODLE_HPP
#define MATFDP_NOODLE_HPP

#include <cstddef>

#include "matfdp/covfactor.hpp"
#include "matfdp/fdp_plugin.hpp"
#include "matfdp/teststats.hpp"

namespace matfdp {

// Factor fit on vec(X) against the leading Kronecker eigenpairs of
// sigma2_hat (x) sigma1_hat.
struct NoodleFit {
  NoodleLoadings loadings;
  Vector w_hat;        // length h
  Matrix zeta_hat;     // p x q, zeta_l = f_l^T w_hat
  bool fell_back = false;
};

NoodleFit fit_noodle(const TestMatrix& tm, NoodleLoadings nl, EstimatorSpec estimator = {});

// zeta = F w evaluated through the separable rows of F.
Matrix noodle_shift(const NoodleLoadings& nl, const Vector& w);

// Plug-in estimate of FDP(t) summed over every cell. R is R(t) from the same
// p-values; returns 0 when R = 0.
double fdp_noodle(const NoodleFit& fit, std::size_t rejections, double t);

// The same formula evaluated with true loadings and true realized factors,
// summed over true nulls only. Passing an all-true mask gives FDP_A.
double fdp_oracle_noodle(const NoodleLoadings& truth, const Vector& w, const TruthMask& mask,
                         std::size_t rejections, double t);

}  // namespace matfdp

#endif  // MATFDP_NOODLE_HPP
