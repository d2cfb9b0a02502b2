#include "qsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace qsim::rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t master_seed, std::uint64_t stream_id)
    : eng_(splitmix64(master_seed ^ splitmix64(stream_id * 0x632BE59BD9B4E019ULL + 1))) {}

double Stream::uniform() {
  // top 53 bits -> [0, 1)
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Stream::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // 1-u keeps the log argument in (0, 1]
  const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Stream::bits() { return eng_(); }

}  // namespace qsim::rng
