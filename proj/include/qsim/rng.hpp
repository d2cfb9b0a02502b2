#pragma once

#include <cstdint>
#include <random>

namespace qsim::rng {

// splitmix64 mixing step; used to derive well-separated engine seeds.
std::uint64_t splitmix64(std::uint64_t x);

// One deterministic random stream. Every Monte Carlo sample owns the stream
// (master_seed, stream_id), so a result can never depend on which worker
// thread picked the sample up or in what order samples were evaluated.
//
// Gaussians come from a hand-rolled Box-Muller transform instead of
// std::normal_distribution, whose output sequence is implementation-defined;
// reproducibility across standard libraries matters more than speed here.
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t stream_id);

  // uniform double in [0, 1) with 53 random bits
  double uniform();

  // standard normal deviate
  double gaussian();

  // raw 64 random bits
  std::uint64_t bits();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qsim::rng
