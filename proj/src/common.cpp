#include "perronlab/common.hpp"

#include <cstdlib>
#include <thread>

namespace perronlab {

int thread_cap() {
  const char* env = std::getenv("PERRON_LAB_THREADS");
  if (env) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace perronlab
