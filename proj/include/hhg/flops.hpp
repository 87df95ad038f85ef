#pragma once

#include <cstdint>

namespace hhg::flops {

// Process-wide counter of floating-point operations issued by the kernels
// (multiplies and adds counted separately). Phases are measured by
// differencing reads.
void add(std::uint64_t n);
std::uint64_t read();
void reset();

class Scope {
 public:
  Scope() : start_(read()) {}
  std::uint64_t elapsed() const { return read() - start_; }

 private:
  std::uint64_t start_;
};

}  // namespace hhg::flops
