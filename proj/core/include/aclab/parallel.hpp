#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace aclab {

/// Worker count used by the grid kernels. 0 selects hardware concurrency.
void set_kernel_workers(unsigned n);
unsigned kernel_workers();

/// Calls body(j) for j in [0, rows), split into contiguous blocks across the
/// kernel workers. Bodies must write to disjoint memory.
void parallel_rows(std::size_t rows, const std::function<void(std::size_t)>& body);

/// Sums row(j) over j with a fixed left-to-right order, independent of the
/// number of workers.
double parallel_row_sum(std::size_t rows, const std::function<double(std::size_t)>& row);

}  // namespace aclab
