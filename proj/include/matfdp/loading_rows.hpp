#ifndef MATFDP_LOADING_ROWS_HPP
#define MATFDP_LOADING_ROWS_HPP

#include <span>

#include "matfdp/matcore.hpp"

namespace matfdp {

// Lazy view of a (pq) x k loading matrix. Implementations compute row l on
// demand from separable factors, so the full matrix is never stored.
class LoadingRows {
 public:
  virtual ~LoadingRows() = default;
  virtual Index count() const = 0;
  virtual Index width() const = 0;
  virtual void row(Index l, std::span<double> out) const = 0;
};

// Adapter over an explicit matrix; used by tests and small problems.
class DenseLoadingRows final : public LoadingRows {
 public:
  explicit DenseLoadingRows(Matrix rows) : rows_(std::move(rows)) {}
  Index count() const override { return rows_.rows(); }
  Index width() const override { return rows_.cols(); }
  void row(Index l, std::span<double> out) const override {
    for (Index k = 0; k < rows_.cols(); ++k) out[static_cast<std::size_t>(k)] = rows_(l, k);
  }

 private:
  Matrix rows_;
};

}  // namespace matfdp

#endif  // MATFDP_LOADING_ROWS_HPP
