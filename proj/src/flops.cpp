#include "hhg/flops.hpp"

#include <atomic>

namespace hhg::flops {

namespace {
std::atomic<std::uint64_t> counter{0};
}

void add(std::uint64_t n) { counter.fetch_add(n, std::memory_order_relaxed); }
std::uint64_t read() { return counter.load(std::memory_order_relaxed); }
void reset() { counter.store(0, std::memory_order_relaxed); }

}  // namespace hhg::flops
