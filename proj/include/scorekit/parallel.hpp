#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <vector>

namespace scorekit::parallel {

/// Rows per block in the blocked reductions. Fixed, so the summation tree
/// and therefore every result bit is independent of the thread count.
inline constexpr std::size_t kBlockRows = 1024;

/// Fills `out` with one value per column for row i. Returns false to
/// exclude the row.
using RowFn = std::function<bool(std::size_t i, std::span<double> out)>;

struct ColumnSums {
  std::vector<double> sums;
  std::size_t included = 0;
};

/// Compensated column sums over rows, parallel over fixed-size blocks and
/// merged in block order.
ColumnSums column_sums(std::size_t rows, std::size_t cols, const RowFn& row);

/// Single pass over all rows in order.
ColumnSums column_sums_serial(std::size_t rows, std::size_t cols, const RowFn& row);

/// Runs body(i) for i in [0, n) across OpenMP threads. An exception thrown
/// by any iteration is rethrown after the loop; when several iterations
/// throw, the one with the lowest index wins.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body);

int max_threads();

/// Caps the OpenMP thread count from SCOREKIT_THREADS when it is set to a
/// positive integer.
void apply_thread_cap_from_env();

}  // namespace scorekit::parallel
