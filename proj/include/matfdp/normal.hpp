#ifndef MATFDP_NORMAL_HPP
#define MATFDP_NORMAL_HPP

namespace matfdp {

// Standard normal CDF.
double norm_cdf(double x);

// Two-sided p-value 2*Phi(-|x|), computed through erfc so the upper tail
// keeps full relative precision.
double two_sided_p(double x);

// Inverse of the standard normal CDF for p in (0, 1).
double norm_quantile(double p);

}  // namespace matfdp

#endif  // MATFDP_NORMAL_HPP
