#ifndef MATFDP_RNG_HPP
#define MATFDP_RNG_HPP

#include <cstdint>

namespace matfdp {

// Counter-based generator. The key is derived from (seed, round, stream) and
// the i-th draw is a pure function of (key, i), so any task can reconstruct its
// stream without coordination and parallel runs reproduce serial ones.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t round = 0,
                      std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double exponential();
  // Student t with integer degrees of freedom.
  double student_t(int dof);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace matfdp

#endif  // MATFDP_RNG_HPP
