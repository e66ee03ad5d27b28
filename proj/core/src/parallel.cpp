#include "nusavocab/parallel.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <string_view>

namespace nusavocab {
namespace {

std::atomic<std::size_t> g_override{0};

std::size_t from_environment() {
  const char* raw = std::getenv("NUSAVOCAB_THREADS");
  if (raw == nullptr) return 0;
  std::string_view text(raw);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return 0;
  return value;
}

}  // namespace

std::size_t worker_count() {
  if (std::size_t forced = g_override.load(std::memory_order_relaxed); forced > 0) return forced;
  if (std::size_t env = from_environment(); env > 0) return env;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_worker_count(std::size_t workers) {
  g_override.store(workers, std::memory_order_relaxed);
}

}  // namespace nusavocab
