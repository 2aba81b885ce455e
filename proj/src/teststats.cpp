#include "matfdp/teststats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matfdp/errors.hpp"
#include "matfdp/kernels.hpp"
#include "matfdp/normal.hpp"
#include "matfdp/parallel.hpp"

namespace matfdp {

void TwoSampleDataset::validate() const {
  if (n() < 2 || m() < 2 || total() < 5) {
    throw InvalidDataset("dataset needs n >= 2, m >= 2 and n + m >= 5 (got n=" + std::to_string(n()) +
                         ", m=" + std::to_string(m()) + ")");
  }
  const Index p = rows();
  const Index q = cols();
  if (p < 1 || q < 1) throw InvalidDataset("dataset matrices must be non-empty");
  auto check = [&](const Matrix& a, const char* group, std::size_t k) {
    if (a.rows() != p || a.cols() != q) {
      throw InvalidDataset(std::string(group) + " observation " + std::to_string(k) + " has shape " +
                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    if (!a.allFinite()) {
      throw InvalidDataset(std::string(group) + " observation " + std::to_string(k) + " has a non-finite entry");
    }
  };
  for (std::size_t k = 0; k < n(); ++k) check(treatment[k], "treatment", k);
  for (std::size_t k = 0; k < m(); ++k) check(control[k], "control", k);
}

TruthMask TruthMask::all(Index rows, Index cols, bool value) {
  return TruthMask{rows, cols, std::vector<unsigned char>(static_cast<std::size_t>(rows * cols), value ? 1 : 0)};
}

std::size_t TruthMask::null_count() const {
  return static_cast<std::size_t>(std::count(is_null.begin(), is_null.end(), 1));
}

namespace {

Matrix checked_sigma(const kernels::PooledMoments& mom) {
  Matrix sigma = mom.variance.cwiseSqrt();
  for (Index j = 0; j < sigma.cols(); ++j) {
    for (Index i = 0; i < sigma.rows(); ++i) {
      // The relative floor catches constant cells whose variance is rounding
      // noise from the mean computation.
      const double scale = std::fabs(mom.mean_treatment(i, j)) + std::fabs(mom.mean_control(i, j));
      if (!(sigma(i, j) > std::max(1e-300, 1e-13 * scale))) {
        throw DegenerateVariance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }
  return sigma;
}

}  // namespace

Matrix pooled_sigma(const TwoSampleDataset& ds) {
  ds.validate();
  return checked_sigma(kernels::omp::pooled_moments(ds.treatment, ds.control));
}

TestMatrix test_matrix(const TwoSampleDataset& ds) {
  ds.validate();
  const auto mom = kernels::omp::pooled_moments(ds.treatment, ds.control);
  TestMatrix tm;
  tm.sigma_hat = checked_sigma(mom);
  const double n = static_cast<double>(ds.n());
  const double m = static_cast<double>(ds.m());
  tm.scale = std::sqrt(n * m / (n + m));
  tm.x = tm.scale * (mom.mean_treatment - mom.mean_control).cwiseQuotient(tm.sigma_hat);
  return tm;
}

Matrix p_values(const TestMatrix& tm) {
  Matrix p(tm.x.rows(), tm.x.cols());
  const Index total = p.size();
  const double* x = tm.x.data();
  double* out = p.data();
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index k = 0; k < total; ++k) out[k] = two_sided_p(x[k]);
  return p;
}

std::size_t rejection_count(const Matrix& p, double t) {
  return static_cast<std::size_t>((p.array() <= t).count());
}

FdpCount true_fdp(const Matrix& p, const TruthMask& mask, double t) {
  if (mask.rows != p.rows() || mask.cols != p.cols()) {
    throw InvalidMatrix("true_fdp: mask shape does not match p-values");
  }
  FdpCount out;
  const double* data = p.data();
  for (std::size_t k = 0; k < mask.is_null.size(); ++k) {
    if (data[k] <= t) {
      ++out.rejections;
      if (mask.is_null[k]) ++out.false_discoveries;
    }
  }
  out.fdp = out.rejections == 0 ? 0.0
                                : static_cast<double>(out.false_discoveries) / static_cast<double>(out.rejections);
  return out;
}

}  // namespace matfdp
