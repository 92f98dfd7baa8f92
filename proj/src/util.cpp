#include "wedgecmc/util.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wedgecmc {

int threadBudget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("WEDGECMC_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) hw = std::min(hw, cap);
  }
  return hw;
}

void parallelFor(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunkFn) {
  if (n == 0) return;
  const int budget = threadBudget();
  // Fixed chunk layout independent of the thread budget.
  const std::size_t chunks = std::min<std::size_t>(64, n);
  const std::size_t per = (n + chunks - 1) / chunks;
  if (budget == 1 || n < 256) {
    for (std::size_t c = 0; c * per < n; ++c)
      chunkFn(c * per, std::min(n, (c + 1) * per));
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> cursor{0};
  for (int t = 0; t < budget; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        std::size_t c = cursor.fetch_add(1);
        std::size_t lo = c * per;
        if (lo >= n) break;
        chunkFn(lo, std::min(n, lo + per));
      }
    });
  }
  for (auto& th : pool) th.join();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string toHex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace wedgecmc
