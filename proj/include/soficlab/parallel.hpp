#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace soficlab {

// Worker cap: SOFICLAB_THREADS env var, overridable via set_thread_cap
// (the CLI --threads flag). Never affects results: work is split into
// deterministic ranges and reduced in a fixed order.
int thread_cap();
void set_thread_cap(int n);

// Runs body(begin, end) over a partition of [0, n) into contiguous blocks.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body);

// Fixed-shape pairwise tree sum: the reduction tree depends only on n,
// so results are bit-identical across thread counts, and a q-fold
// block-replicated array sums to exactly q times the original sum when
// q is a power of two.
double pairwise_sum(const double* a, size_t n);
inline double pairwise_sum(const std::vector<double>& a) {
  return pairwise_sum(a.data(), a.size());
}

}  // namespace soficlab
