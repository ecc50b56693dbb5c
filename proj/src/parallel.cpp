#include "epd/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace epd {

int worker_count() {
  const char* env = std::getenv("EPD_WORKERS");
  if (env == nullptr) return 1;
  try {
    const int n = std::stoi(env);
    return std::clamp(n, 1, 256);
  } catch (const std::exception&) {
    return 1;
  }
}

void parallel_for(Index n, const std::function<void(Index, Index)>& body) {
  const Index workers = std::min<Index>(worker_count(), std::max<Index>(n / 256, 1));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace epd
