#include "bgmatte/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "bgmatte/error.hpp"

namespace bgmatte {

int thread_count_from_env() {
  const char* raw = std::getenv("BGMATTE_THREADS");
  int requested = 0;
  if (raw != nullptr && *raw != '\0') {
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || v < 0 || v > 1024) {
      throw Error(ErrorKind::config,
                  std::string("BGMATTE_THREADS must be an integer in [0,1024], got '") + raw +
                      "'");
    }
    requested = static_cast<int>(v);
  }
  if (requested == 0) {
    requested = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  return requested;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace bgmatte
