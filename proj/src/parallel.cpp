#include "chemdim/parallel.hpp"

#include <cstdlib>
#include <string>

namespace chemdim {

namespace {
std::atomic<unsigned> configured_threads{0};
}

void set_thread_count(unsigned count) { configured_threads.store(count); }

unsigned thread_count() {
  if (unsigned c = configured_threads.load(); c > 0) return c;
  if (const char* env = std::getenv("CHEMDIM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace chemdim
