#include "sparsespec/parallel.hpp"

#include <omp.h>

namespace sparsespec {

namespace {
int g_default_threads = 0;
}

void set_num_threads(int threads) {
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(threads < 1 ? g_default_threads : threads);
}

int num_threads() { return omp_get_max_threads(); }

}  // namespace sparsespec
