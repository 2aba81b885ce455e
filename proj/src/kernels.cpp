#include "matfdp/kernels.hpp"

#include <cmath>

#include "matfdp/normal.hpp"
#include "matfdp/parallel.hpp"

namespace matfdp::kernels {
namespace {

// Observations per block in correlation_sums.
constexpr std::size_t kObsBlock = 8;

const Matrix& observation(std::span<const Matrix> treatment, std::span<const Matrix> control,
                          std::size_t k) {
  return k < treatment.size() ? treatment[k] : control[k - treatment.size()];
}

double plugin_term(double coef, double shift, double z) {
  return norm_cdf(coef * (z + shift)) + norm_cdf(coef * (z - shift));
}

}  // namespace

namespace serial {

PooledMoments pooled_moments(std::span<const Matrix> treatment, std::span<const Matrix> control) {
  const Index p = treatment.front().rows();
  const Index q = treatment.front().cols();
  PooledMoments out{Matrix::Zero(p, q), Matrix::Zero(p, q), Matrix::Zero(p, q)};
  for (const Matrix& y : treatment) out.mean_treatment += y;
  for (const Matrix& z : control) out.mean_control += z;
  out.mean_treatment /= static_cast<double>(treatment.size());
  out.mean_control /= static_cast<double>(control.size());
  for (const Matrix& y : treatment) out.variance.array() += (y - out.mean_treatment).array().square();
  for (const Matrix& z : control) out.variance.array() += (z - out.mean_control).array().square();
  out.variance /= static_cast<double>(treatment.size() + control.size() - 2);
  return out;
}

CorrelationSums correlation_sums(std::span<const Matrix> treatment, std::span<const Matrix> control,
                                 const Matrix& mean_treatment, const Matrix& mean_control,
                                 const Matrix& inv_sigma) {
  const Index p = inv_sigma.rows();
  const Index q = inv_sigma.cols();
  CorrelationSums out{Matrix::Zero(p, p), Matrix::Zero(q, q)};
  for (const Matrix& y : treatment) {
    const Matrix s = (y - mean_treatment).cwiseProduct(inv_sigma);
    out.row_side.noalias() += s * s.transpose();
    out.col_side.noalias() += s.transpose() * s;
  }
  for (const Matrix& z : control) {
    const Matrix s = (z - mean_control).cwiseProduct(inv_sigma);
    out.row_side.noalias() += s * s.transpose();
    out.col_side.noalias() += s.transpose() * s;
  }
  return out;
}

double plugin_sum(std::span<const double> coef, std::span<const double> shift, double z,
                  std::span<const unsigned char> include) {
  double total = 0.0;
  for (std::size_t l = 0; l < coef.size(); ++l) {
    if (!include.empty() && !include[l]) continue;
    total += plugin_term(coef[l], shift[l], z);
  }
  return total;
}

Matrix gram(const Matrix& f) { return f.transpose() * f; }

NormalEquations normal_equations(const LoadingRows& design, std::span<const Index> rows,
                                 std::span<const double> weights, std::span<const double> response) {
  const Index k = design.width();
  NormalEquations out{Matrix::Zero(k, k), Vector::Zero(k)};
  Vector b(k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    design.row(rows[r], std::span<double>(b.data(), static_cast<std::size_t>(k)));
    out.lhs.noalias() += weights[r] * b * b.transpose();
    out.rhs.noalias() += (weights[r] * response[r]) * b;
  }
  return out;
}

}  // namespace serial

namespace omp {

PooledMoments pooled_moments(std::span<const Matrix> treatment, std::span<const Matrix> control) {
  const Index p = treatment.front().rows();
  const Index q = treatment.front().cols();
  PooledMoments out{Matrix(p, q), Matrix(p, q), Matrix(p, q)};
  const double n = static_cast<double>(treatment.size());
  const double m = static_cast<double>(control.size());
  const double df = n + m - 2.0;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index j = 0; j < q; ++j) {
    for (Index i = 0; i < p; ++i) {
      double sy = 0.0, sz = 0.0;
      for (const Matrix& y : treatment) sy += y(i, j);
      for (const Matrix& z : control) sz += z(i, j);
      const double my = sy / n;
      const double mz = sz / m;
      double ss = 0.0;
      for (const Matrix& y : treatment) ss += (y(i, j) - my) * (y(i, j) - my);
      for (const Matrix& z : control) ss += (z(i, j) - mz) * (z(i, j) - mz);
      out.mean_treatment(i, j) = my;
      out.mean_control(i, j) = mz;
      out.variance(i, j) = ss / df;
    }
  }
  return out;
}

CorrelationSums correlation_sums(std::span<const Matrix> treatment, std::span<const Matrix> control,
                                 const Matrix& mean_treatment, const Matrix& mean_control,
                                 const Matrix& inv_sigma) {
  const Index p = inv_sigma.rows();
  const Index q = inv_sigma.cols();
  const std::size_t total = treatment.size() + control.size();
  const std::size_t blocks = block_count(total, kObsBlock);
  std::vector<Matrix> row_part(blocks), col_part(blocks);
  const auto nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long blk = 0; blk < nb; ++blk) {
    const auto b = static_cast<std::size_t>(blk);
    Matrix rows = Matrix::Zero(p, p);
    Matrix cols = Matrix::Zero(q, q);
    Matrix s(p, q);
    const std::size_t hi = std::min(total, (b + 1) * kObsBlock);
    for (std::size_t k = b * kObsBlock; k < hi; ++k) {
      const Matrix& mean = k < treatment.size() ? mean_treatment : mean_control;
      s = (observation(treatment, control, k) - mean).cwiseProduct(inv_sigma);
      rows.selfadjointView<Eigen::Lower>().rankUpdate(s);
      cols.selfadjointView<Eigen::Lower>().rankUpdate(s.transpose());
    }
    row_part[b] = std::move(rows);
    col_part[b] = std::move(cols);
  }
  CorrelationSums out{Matrix::Zero(p, p), Matrix::Zero(q, q)};
  for (std::size_t b = 0; b < blocks; ++b) {
    out.row_side += row_part[b];
    out.col_side += col_part[b];
  }
  out.row_side.triangularView<Eigen::StrictlyUpper>() = out.row_side.transpose();
  out.col_side.triangularView<Eigen::StrictlyUpper>() = out.col_side.transpose();
  return out;
}

double plugin_sum(std::span<const double> coef, std::span<const double> shift, double z,
                  std::span<const unsigned char> include) {
  if (include.empty()) {
    return blocked_sum(coef.size(), [&](std::size_t l) { return plugin_term(coef[l], shift[l], z); });
  }
  return blocked_sum(coef.size(), [&](std::size_t l) {
    return include[l] ? plugin_term(coef[l], shift[l], z) : 0.0;
  });
}

Matrix gram(const Matrix& f) {
  const Index n = f.rows();
  const Index k = f.cols();
  const std::size_t blocks = block_count(static_cast<std::size_t>(n));
  std::vector<Matrix> part(blocks);
  const auto nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long blk = 0; blk < nb; ++blk) {
    const Index lo = static_cast<Index>(blk) * static_cast<Index>(kReduceBlock);
    const Index len = std::min<Index>(static_cast<Index>(kReduceBlock), n - lo);
    Matrix g = Matrix::Zero(k, k);
    g.selfadjointView<Eigen::Lower>().rankUpdate(f.middleRows(lo, len).transpose());
    part[static_cast<std::size_t>(blk)] = std::move(g);
  }
  Matrix out = Matrix::Zero(k, k);
  for (const Matrix& g : part) out += g;
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

NormalEquations normal_equations(const LoadingRows& design, std::span<const Index> rows,
                                 std::span<const double> weights, std::span<const double> response) {
  const Index k = design.width();
  const std::size_t blocks = block_count(rows.size());
  std::vector<NormalEquations> part(blocks);
  const auto nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long blk = 0; blk < nb; ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kReduceBlock;
    const std::size_t hi = std::min(rows.size(), lo + kReduceBlock);
    NormalEquations ne{Matrix::Zero(k, k), Vector::Zero(k)};
    Vector b(k);
    for (std::size_t r = lo; r < hi; ++r) {
      design.row(rows[r], std::span<double>(b.data(), static_cast<std::size_t>(k)));
      ne.lhs.selfadjointView<Eigen::Lower>().rankUpdate(b, weights[r]);
      ne.rhs.noalias() += (weights[r] * response[r]) * b;
    }
    part[static_cast<std::size_t>(blk)] = std::move(ne);
  }
  NormalEquations out{Matrix::Zero(k, k), Vector::Zero(k)};
  for (const NormalEquations& ne : part) {
    out.lhs += ne.lhs;
    out.rhs += ne.rhs;
  }
  out.lhs.triangularView<Eigen::StrictlyUpper>() = out.lhs.transpose();
  return out;
}

}  // namespace omp

}  // namespace matfdp::kernels
