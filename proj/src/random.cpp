#include "hslab/random.hpp"

#include <cmath>
#include <numbers>

namespace hslab {

namespace {

std::seed_seq make_seq(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(seed), hi(seed), lo(tag), hi(tag), lo(index), hi(index)};
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  auto seq = make_seq(seed, tag, index);
  engine_.seed(seq);
}

double StreamRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double StreamRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hslab
