#include "scorekit/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

#include "scorekit/numerics.hpp"

namespace scorekit::parallel {

namespace {

using numerics::CompensatedSum;

struct BlockResult {
  std::vector<CompensatedSum> sums;
  std::size_t included = 0;
};

BlockResult run_block(std::size_t begin, std::size_t end, std::size_t cols, const RowFn& row) {
  BlockResult r{std::vector<CompensatedSum>(cols), 0};
  std::vector<double> buf(cols);
  for (std::size_t i = begin; i < end; ++i) {
    if (!row(i, buf)) continue;
    ++r.included;
    for (std::size_t j = 0; j < cols; ++j) r.sums[j].add(buf[j]);
  }
  return r;
}

}  // namespace

ColumnSums column_sums(std::size_t rows, std::size_t cols, const RowFn& row) {
  const std::size_t blocks = (rows + kBlockRows - 1) / kBlockRows;
  std::vector<BlockResult> partial(blocks);
  for_each_index(blocks, [&](std::size_t b) {
    const std::size_t begin = b * kBlockRows;
    const std::size_t end = std::min(rows, begin + kBlockRows);
    partial[b] = run_block(begin, end, cols, row);
  });
  std::vector<CompensatedSum> total(cols);
  ColumnSums out;
  for (const auto& p : partial) {
    out.included += p.included;
    for (std::size_t j = 0; j < cols; ++j) total[j].merge(p.sums[j]);
  }
  out.sums.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) out.sums[j] = total[j].value();
  return out;
}

ColumnSums column_sums_serial(std::size_t rows, std::size_t cols, const RowFn& row) {
  const BlockResult r = run_block(0, rows, cols, row);
  ColumnSums out;
  out.included = r.included;
  out.sums.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) out.sums[j] = r.sums[j].value();
  return out;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int max_threads() { return omp_get_max_threads(); }

void apply_thread_cap_from_env() {
  const char* env = std::getenv("SCOREKIT_THREADS");
  if (env == nullptr) return;
  try {
    const int cap = std::stoi(env);
    if (cap > 0 && cap < omp_get_max_threads()) omp_set_num_threads(cap);
  } catch (const std::exception&) {
    // Ignored: a malformed cap leaves the OpenMP default in place.
  }
}

}  // namespace scorekit::parallel
