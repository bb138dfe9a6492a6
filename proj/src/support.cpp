#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "msfem/log.hpp"
#include "msfem/parallel.hpp"

namespace msfem {

namespace {
std::mutex sink_mutex;
WarningSink& sink() {
  static WarningSink s;
  return s;
}
}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex);
  sink() = std::move(s);
}

void warn(const std::string& code, const std::string& message) {
  std::lock_guard lock(sink_mutex);
  if (sink())
    sink()(code, message);
  else
    std::cerr << "warning: " << code << ": " << message << '\n';
}

int resolve_workers(int fallback) {
  if (const char* env = std::getenv("MSFEM_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return fallback > 0 ? fallback : 1;
}

void parallel_for(Index n, int workers, const std::function<void(Index)>& body) {
  if (workers <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<Index>(workers, n));
  for (int t = 0; t < count; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace msfem
