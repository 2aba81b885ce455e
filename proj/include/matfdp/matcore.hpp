#ifndef MATFDP_MATCORE_HPP
#define MATFDP_MATCORE_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "matfdp/rng.hpp"

namespace matfdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Eigenpairs of a symmetric matrix. values are non-increasing; column k of
// vectors is the unit eigenvector for values[k], with its first component of
// magnitude > 1e-12 made positive.
struct EigenSystem {
  Vector values;
  Matrix vectors;

  Index size() const { return values.size(); }
};

// One eigenpair of B (x) A, identified by the column indices of the factors'
// eigensystems (0-based). The eigenvector is gamma_j (x) nu_i and is never
// formed explicitly.
struct KronEntry {
  double value;
  Index i;  // into the eigensystem of A (row / p side)
  Index j;  // into the eigensystem of B (column / q side)
};

// All p*q Kronecker eigenvalues, non-increasing; equal values keep (i, j)
// lexicographic order.
struct KronEigenIndex {
  std::vector<KronEntry> entries;

  std::size_t size() const { return entries.size(); }
  const KronEntry& operator[](std::size_t k) const { return entries[k]; }
};

void require_finite(const Matrix& m, const char* what);
void require_symmetric(const Matrix& m, const char* what);

EigenSystem sym_eigen(const Matrix& m);

KronEigenIndex kron_eigenpairs(const EigenSystem& e1, const EigenSystem& e2);

// Symmetric square root through the eigendecomposition. Eigenvalues in
// [-1e-8 * lambda_max, 0) are treated as zero; anything more negative throws
// NotPsd.
Matrix sym_sqrt(const Matrix& m);

Matrix corr_from_cov(const Matrix& c);

// Column-stacking vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

// Draws mu + U^{1/2} G V^{1/2}. The square roots are computed once at
// construction so repeated draws only cost two matrix products.
class MatrixNormalSampler {
 public:
  MatrixNormalSampler(Matrix mu, const Matrix& row_cov, const Matrix& col_cov);

  Matrix draw(CounterRng& rng) const;

  Index rows() const { return mu_.rows(); }
  Index cols() const { return mu_.cols(); }

 private:
  Matrix mu_;
  Matrix row_root_;
  Matrix col_root_;
};

Matrix sample_matrix_normal(const Matrix& mu, const Matrix& row_cov,
                            const Matrix& col_cov, CounterRng& rng);

// Fills a rows x cols matrix with i.i.d. standard normals, column by column.
Matrix standard_normal_matrix(Index rows, Index cols, CounterRng& rng);

}  // namespace matfdp

#endif  // MATFDP_MATCORE_HPP
