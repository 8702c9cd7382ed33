#include "svsp/core/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace svsp {

int max_threads() { return omp_get_max_threads(); }

void set_max_threads(int n) { omp_set_num_threads(std::max(1, n)); }

ScopedThreads::ScopedThreads(int n) : previous_(max_threads()) {
  if (n > 0) set_max_threads(n);
}

ScopedThreads::~ScopedThreads() { set_max_threads(previous_); }

}  // namespace svsp
