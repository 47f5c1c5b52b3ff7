#include "siglift/rng.hpp"

namespace siglift {

namespace {
std::atomic<std::size_t> g_threads{0};
}

std::size_t default_threads() {
  std::size_t n = g_threads.load();
  if (n == 0) n = std::max<unsigned>(1, std::thread::hardware_concurrency());
  return n;
}

void set_default_threads(std::size_t n) { g_threads = n; }

}  // namespace siglift
