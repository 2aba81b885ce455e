#ifndef MATFDP_TESTSTATS_HPP
#define MATFDP_TESTSTATS_HPP

#include <cstddef>
#include <vector>

#include "matfdp/matcore.hpp"

namespace matfdp {

// Treatment stack Y_1..Y_n and control stack Z_1..Z_m, all p x q.
struct TwoSampleDataset {
  std::vector<Matrix> treatment;
  std::vector<Matrix> control;

  Index rows() const { return treatment.empty() ? 0 : treatment.front().rows(); }
  Index cols() const { return treatment.empty() ? 0 : treatment.front().cols(); }
  std::size_t n() const { return treatment.size(); }
  std::size_t m() const { return control.size(); }
  std::size_t total() const { return treatment.size() + control.size(); }

  // Throws InvalidDataset unless n >= 2, m >= 2, n + m >= 5, shapes agree and
  // every entry is finite.
  void validate() const;
};

struct TestMatrix {
  Matrix x;
  Matrix sigma_hat;
  double scale = 0.0;  // sqrt(nm / (n + m))
};

// Column-major p x q flags, true (1) where the two group means agree. Stored in
// vec order so it lines up with vec(X).
struct TruthMask {
  Index rows = 0;
  Index cols = 0;
  std::vector<unsigned char> is_null;

  static TruthMask all(Index rows, Index cols, bool value);
  bool operator()(Index i, Index j) const { return is_null[static_cast<std::size_t>(j * rows + i)] != 0; }
  void set(Index i, Index j, bool value) { is_null[static_cast<std::size_t>(j * rows + i)] = value ? 1 : 0; }
  std::size_t null_count() const;
};

struct FdpCount {
  std::size_t false_discoveries = 0;  // V(t)
  std::size_t rejections = 0;         // R(t)
  double fdp = 0.0;                   // V / R, 0 when R = 0
};

Matrix pooled_sigma(const TwoSampleDataset& ds);

TestMatrix test_matrix(const TwoSampleDataset& ds);

Matrix p_values(const TestMatrix& tm);

std::size_t rejection_count(const Matrix& p, double t);

FdpCount true_fdp(const Matrix& p, const TruthMask& mask, double t);

}  // namespace matfdp

#endif  // MATFDP_TESTSTATS_HPP
