#include "matfdp/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matfdp/errors.hpp"

namespace matfdp {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidMatrix(std::string(what) + ": non-finite entry");
  }
}

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidMatrix(std::string(what) + ": expected a non-empty square matrix");
  }
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = j + 1; i < m.rows(); ++i) {
      const double a = m(i, j);
      if (std::fabs(a - m(j, i)) > 1e-12 * std::max(1.0, std::fabs(a))) {
        throw InvalidMatrix(std::string(what) + ": not symmetric");
      }
    }
  }
}

EigenSystem sym_eigen(const Matrix& m) {
  require_finite(m, "sym_eigen");
  require_symmetric(m, "sym_eigen");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw InvalidMatrix("sym_eigen: eigensolver did not converge");
  }
  const Index n = m.rows();
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();

  for (Index k = 0; k < n; ++k) {
    auto col = out.vectors.col(k);
    for (Index r = 0; r < n; ++r) {
      if (std::fabs(col(r)) > 1e-12) {
        if (col(r) < 0.0) col = -col;
        break;
      }
    }
  }
  return out;
}

KronEigenIndex kron_eigenpairs(const EigenSystem& e1, const EigenSystem& e2) {
  const Index p = e1.size();
  const Index q = e2.size();
  KronEigenIndex out;
  out.entries.reserve(static_cast<std::size_t>(p * q));
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < q; ++j) {
      out.entries.push_back({e2.values(j) * e1.values(i), i, j});
    }
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const KronEntry& a, const KronEntry& b) { return a.value > b.value; });
  return out;
}

Matrix sym_sqrt(const Matrix& m) {
  const EigenSystem es = sym_eigen(m);
  const double top = es.values(0);
  const double floor = -1e-8 * std::max(top, 0.0);
  Vector roots(es.size());
  for (Index k = 0; k < es.size(); ++k) {
    const double v = es.values(k);
    if (v < floor || (top <= 0.0 && v < 0.0)) {
      throw NotPsd("sym_sqrt: eigenvalue " + std::to_string(v) + " is negative");
    }
    roots(k) = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return es.vectors * roots.asDiagonal() * es.vectors.transpose();
}

Matrix corr_from_cov(const Matrix& c) {
  require_finite(c, "corr_from_cov");
  if (c.rows() != c.cols()) throw InvalidMatrix("corr_from_cov: expected a square matrix");
  const Index n = c.rows();
  Vector inv_sd(n);
  for (Index i = 0; i < n; ++i) {
    if (!(c(i, i) > 0.0)) throw DegenerateVariance(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
    inv_sd(i) = 1.0 / std::sqrt(c(i, i));
  }
  Matrix out = inv_sd.asDiagonal() * c * inv_sd.asDiagonal();
  out.diagonal().setOnes();
  // Mirror the lower triangle so the result is exactly symmetric.
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose().triangularView<Eigen::StrictlyUpper>();
  return out;
}

Vector vec(const Matrix& m) { return m.reshaped(); }

Matrix unvec(const Vector& v, Index rows, Index cols) { return v.reshaped(rows, cols); }

Matrix standard_normal_matrix(Index rows, Index cols, CounterRng& rng) {
  Matrix g(rows, cols);
  double* data = g.data();
  for (Index k = 0; k < rows * cols; ++k) data[k] = rng.normal();
  return g;
}

MatrixNormalSampler::MatrixNormalSampler(Matrix mu, const Matrix& row_cov, const Matrix& col_cov)
    : mu_(std::move(mu)) {
  if (row_cov.rows() != mu_.rows() || col_cov.rows() != mu_.cols()) {
    throw InvalidMatrix("MatrixNormalSampler: covariance dimensions do not match the mean");
  }
  require_finite(mu_, "MatrixNormalSampler");
  row_root_ = sym_sqrt(row_cov);
  col_root_ = sym_sqrt(col_cov);
}

Matrix MatrixNormalSampler::draw(CounterRng& rng) const {
  const Matrix g = standard_normal_matrix(mu_.rows(), mu_.cols(), rng);
  Matrix out = mu_;
  out.noalias() += row_root_ * g * col_root_;
  return out;
}

Matrix sample_matrix_normal(const Matrix& mu, const Matrix& row_cov, const Matrix& col_cov,
                            CounterRng& rng) {
  return MatrixNormalSampler(mu, row_cov, col_cov).draw(rng);
}

}  // namespace matfdp
