#include "suffmdp/parallel.hpp"

#include <cstdlib>
#include <string>

namespace suffmdp {
namespace {

std::size_t default_thread_count() {
  if (const char* env = std::getenv("SUFFMDP_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // fall through to hardware concurrency
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<std::size_t>& configured() {
  static std::atomic<std::size_t> n{default_thread_count()};
  return n;
}

}  // namespace

std::size_t thread_count() { return configured().load(); }

void set_thread_count(std::size_t n) { configured().store(n == 0 ? default_thread_count() : n); }

namespace detail {
bool& in_parallel_region() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

}  // namespace suffmdp
