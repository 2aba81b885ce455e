#ifndef MATFDP_FDP_PLUGIN_HPP
#define MATFDP_FDP_PLUGIN_HPP

#include <cstddef>
#include <span>

#include "matfdp/matcore.hpp"

namespace matfdp {

enum class FactorEstimator { least_squares, trimmed_l1 };

// How the realized factors are estimated from vec(X).
struct EstimatorSpec {
  FactorEstimator kind = FactorEstimator::least_squares;
  double trim_fraction = 0.9;

  static EstimatorSpec least_squares() { return {}; }
  static EstimatorSpec trimmed(double fraction = 0.9) { return {FactorEstimator::trimmed_l1, fraction}; }
};

// (1/R) sum_l [Phi(c_l (z + s_l)) + Phi(c_l (z - s_l))] with z = Phi^{-1}(t/2),
// summed over cells with include[l] != 0 (all cells when include is empty).
// Returns 0 when R = 0 and is clamped to [0, cells / R].
double plugin_fdp(std::span<const double> coef, std::span<const double> shift, std::size_t rejections,
                  double t, std::span<const unsigned char> include = {});

// (1 - ||b_l||^2)^{-1/2} per cell, from already clamped squared norms.
Matrix inflation_coefficients(const Matrix& norms_sq);

// Clamp an FDP value to [0, 1] for user-facing reports.
inline double clamp_proportion(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace matfdp

#endif  // MATFDP_FDP_PLUGIN_HPP
