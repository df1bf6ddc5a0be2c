#include "ergodens/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ergodens {

int effective_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ERGODENS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& fn,
                  int threads) {
  if (n <= 0) return;
  const int workers = std::min<std::int64_t>(effective_threads(threads), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  // Fixed-size chunks pulled from a shared counter; chunk boundaries do not
  // depend on the worker count.
  const std::int64_t chunk = std::max<std::int64_t>(1, n / (4 * workers));
  std::atomic<std::int64_t> next{0};
  auto body = [&]() {
    for (;;) {
      const std::int64_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      fn(begin, std::min(begin + chunk, n));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

}  // namespace ergodens
