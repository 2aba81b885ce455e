#ifndef MATFDP_KERNELS_HPP
#define MATFDP_KERNELS_HPP

// Data-parallel inner loops. Each kernel has a plain serial reference in
// kernels::serial and an OpenMP version in kernels::omp. The OpenMP versions
// partition work into fixed blocks and combine partial results in block order,
// so their output is bitwise identical for every thread count. They agree with
// the serial references up to floating-point reassociation.

#include <span>
#include <vector>

#include "matfdp/loading_rows.hpp"
#include "matfdp/matcore.hpp"

namespace matfdp::kernels {

// Per-cell group means and the pooled variance
//   sum_l (Y_l - Ybar)^2 + sum_k (Z_k - Zbar)^2, divided by n + m - 2.
struct PooledMoments {
  Matrix mean_treatment;
  Matrix mean_control;
  Matrix variance;
};

// Unnormalized sums of S S^T (rows x rows) and S^T S (cols x cols) over all
// standardized, centered observations S = (obs - group mean) o inv_sigma.
struct CorrelationSums {
  Matrix row_side;
  Matrix col_side;
};

// Normal equations A w = b for sum_r weight_r (response_r - b_{rows[r]}^T w)^2
// over a row subset of a LoadingRows design. weights and response are aligned
// with rows.
struct NormalEquations {
  Matrix lhs;
  Vector rhs;
};

namespace serial {

PooledMoments pooled_moments(std::span<const Matrix> treatment, std::span<const Matrix> control);

CorrelationSums correlation_sums(std::span<const Matrix> treatment, std::span<const Matrix> control,
                                 const Matrix& mean_treatment, const Matrix& mean_control,
                                 const Matrix& inv_sigma);

// sum_l [Phi(coef_l (z + shift_l)) + Phi(coef_l (z - shift_l))], optionally
// restricted to cells where include[l] is nonzero.
double plugin_sum(std::span<const double> coef, std::span<const double> shift, double z,
                  std::span<const unsigned char> include = {});

Matrix gram(const Matrix& f);

NormalEquations normal_equations(const LoadingRows& design, std::span<const Index> rows,
                                 std::span<const double> weights, std::span<const double> response);

}  // namespace serial

namespace omp {

PooledMoments pooled_moments(std::span<const Matrix> treatment, std::span<const Matrix> control);

CorrelationSums correlation_sums(std::span<const Matrix> treatment, std::span<const Matrix> control,
                                 const Matrix& mean_treatment, const Matrix& mean_control,
                                 const Matrix& inv_sigma);

double plugin_sum(std::span<const double> coef, std::span<const double> shift, double z,
                  std::span<const unsigned char> include = {});

Matrix gram(const Matrix& f);

NormalEquations normal_equations(const LoadingRows& design, std::span<const Index> rows,
                                 std::span<const double> weights, std::span<const double> response);

}  // namespace omp

}  // namespace matfdp::kernels

#endif  // MATFDP_KERNELS_HPP
