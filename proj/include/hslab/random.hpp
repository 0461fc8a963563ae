#pragma once

#include <cstdint>
#include <random>

namespace hslab {

/// Reproducible random stream keyed by (seed, tag, index). Each stream is a
/// pure function of its key; uniform and normal variates are derived from
/// raw 64-bit words here rather than through <random> distributions, whose
/// output is implementation-defined.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hslab
