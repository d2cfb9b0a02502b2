#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qsim {

// Run fn(cell) for cell = 0..n_cells-1 on up to `workers` threads.
// Cells must be independent and write only to their own pre-sized slots;
// callers do any cross-cell reduction sequentially afterwards, which keeps
// every result bit-identical no matter how many workers ran.
void parallel_for(std::size_t n_cells, int workers, const std::function<void(std::size_t)>& fn);

// Compensated (Kahan) summation in index order. All deterministic reductions
// in this project go through here so that parallel work never changes the
// order in which floating-point error accumulates.
double kahan_sum(const std::vector<double>& values);

}  // namespace qsim
