#include "matfdp/fdp_plugin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "matfdp/kernels.hpp"
#include "matfdp/normal.hpp"

namespace matfdp {

double plugin_fdp(std::span<const double> coef, std::span<const double> shift, std::size_t rejections,
                  double t, std::span<const unsigned char> include) {
  if (coef.size() != shift.size() || (!include.empty() && include.size() != coef.size())) {
    throw std::invalid_argument("plugin_fdp: length mismatch");
  }
  if (rejections == 0) return 0.0;
  const double z = norm_quantile(t / 2.0);
  const double r = static_cast<double>(rejections);
  const double raw = kernels::omp::plugin_sum(coef, shift, z, include) / r;
  return std::clamp(raw, 0.0, static_cast<double>(coef.size()) / r);
}

Matrix inflation_coefficients(const Matrix& norms_sq) {
  return (1.0 - norms_sq.array()).rsqrt().matrix();
}

}  // namespace matfdp
