#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace auctionforge {

// Instance carries no extractable revenue (all values identically zero, or no
// positive anchoring point exists).
class DegenerateInstanceError : public std::runtime_error {
 public:
  explicit DegenerateInstanceError(const std::string& what)
      : std::runtime_error(what) {}
};

// An exact solver would blow through its configured enumeration budget.
// Carries the offending counts so callers can report them.
class InstanceTooLargeError : public std::runtime_error {
 public:
  InstanceTooLargeError(const std::string& what, std::uint64_t requested,
                        std::uint64_t cap)
      : std::runtime_error(what + ": needs " + std::to_string(requested) +
                           ", cap " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}

  std::uint64_t requested() const noexcept { return requested_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t requested_;
  std::uint64_t cap_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Deterministic random stream. The engine is mt19937_64 (fully specified by the
// standard) and words are mapped to doubles by hand, because the distribution
// adaptors in <random> are implementation-defined and would break bit-level
// reproducibility across compilers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Independent-looking stream for worker `index` derived from a master seed.
  // Replicate i of any parallel loop must use substream(master, i) so that
  // results do not depend on the thread count.
  static RandomStream substream(std::uint64_t master, std::uint64_t index) {
    return RandomStream(splitmix64(master + 0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform draw in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// Number of worker threads used by the parallel kernels. Honors the
// AUCTIONFORGE_THREADS environment variable; an explicit set_worker_count
// overrides it (0 restores the default behaviour).
int worker_count();
void set_worker_count(int n);

}  // namespace auctionforge
