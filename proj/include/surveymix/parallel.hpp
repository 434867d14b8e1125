#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace surveymix {

// Every hot kernel exists in two flavors: a plain serial loop kept as the
// reference, and an OpenMP version. Both must produce bit-identical
// output for any thread count, which the tests assert and the bench tool
// times.
enum class Exec { serial, parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Floating-point sum over term(0..n-1) whose result does not depend on
// the thread count: terms are accumulated serially inside fixed-size
// chunks and the chunk partials are combined in index order.
template <typename F>
double deterministic_sum(std::size_t n, F&& term, [[maybe_unused]] Exec exec) {
  constexpr std::size_t kChunk = 2048;
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
#endif
  for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(n_chunks); ++c) {
    const std::size_t lo = std::size_t(c) * kChunk;
    const std::size_t hi = std::min(lo + kChunk, n);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[std::size_t(c)] = s;
  }
  double total = 0.0;
  for (const double s : partial) total += s;
  return total;
}

}  // namespace surveymix
