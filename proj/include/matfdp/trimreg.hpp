#ifndef MATFDP_TRIMREG_HPP
#define MATFDP_TRIMREG_HPP

#include <span>
#include <vector>

#include "matfdp/loading_rows.hpp"
#include "matfdp/matcore.hpp"

namespace matfdp {

struct TrimSpec {
  // Fraction of statistics kept, smallest |z| first.
  double trim_fraction = 0.9;
};

struct TrimmedFit {
  Vector w;
  std::size_t kept = 0;
  int iterations = 0;
  bool converged = false;
  // Kept design was rank deficient; w is least squares over every row.
  bool fell_back = false;
  // Smoothed objective after the initial fit and after each IRLS step.
  std::vector<double> objective_trace;
};

// Solver constants for the smoothed L1 problem.
inline constexpr double kIrlsSmoothing = 1e-6;
inline constexpr double kIrlsStepTol = 1e-8;
inline constexpr int kIrlsMaxIter = 200;

// Indices of the `keep` smallest |z_l|, ties broken by index, returned in
// increasing index order.
std::vector<Index> smallest_magnitude_indices(std::span<const double> z, std::size_t keep);

// (1/m) sum_r sqrt((z_r - b_{rows[r]}^T w)^2 + eps^2); z is aligned with rows.
double smoothed_l1_objective(const LoadingRows& design, std::span<const Index> rows,
                             std::span<const double> z, const Vector& w, double eps = kIrlsSmoothing);

// Ordinary least squares over all rows of the design. Uses a pseudo-inverse
// when the design is rank deficient.
Vector least_squares_fit(const LoadingRows& design, std::span<const double> z);

// argmin_W (1/m) sum_{l in kept} |z_l - b_l^T W| where kept holds the
// floor(trim_fraction * pq) smallest |z_l|. Solved by IRLS on the smoothed
// objective with step halving whenever a step would increase it.
TrimmedFit trimmed_l1_fit(std::span<const double> z, const LoadingRows& design, TrimSpec spec = {});

}  // namespace matfdp

#endif  // MATFDP_TRIMREG_HPP
