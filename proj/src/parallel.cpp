#include "qsim/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace qsim {

void parallel_for(std::size_t n_cells, int workers, const std::function<void(std::size_t)>& fn) {
  if (n_cells == 0) return;
  const std::size_t n_threads =
      std::min<std::size_t>(n_cells, workers > 1 ? static_cast<std::size_t>(workers) : 1);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n_cells; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_cells) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double kahan_sum(const std::vector<double>& values) {
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace qsim
