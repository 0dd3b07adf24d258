#pragma once

#include <cstdint>

namespace mdpsmd {

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based generator: draw t of stream k under seed s is a pure hash of
// (s, k, t), so sequences are reproducible across platforms and splitting off
// a new stream never perturbs existing ones.
struct RngStream {
  uint64_t key = 0;
  uint64_t counter = 0;

  uint64_t next_u64() { return detail::mix64(key + 0x9e3779b97f4a7c15ull * ++counter); }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in {0, ..., n-1}
  int next_below(int n) { return static_cast<int>(next_double() * n); }
};

struct RngState {
  uint64_t seed = 0;

  explicit RngState(uint64_t s = 0) : seed(s) {}

  RngStream stream(uint64_t id) const {
    RngStream r;
    r.key = detail::mix64(seed ^ (0xd1342543de82ef95ull * (id + 1)));
    return r;
  }
};

// Stream roles used by the solvers; fixed so that adding instrumentation
// never changes any draw sequence.
enum : uint64_t {
  kStreamPrimal = 0,
  kStreamDual = 1,
  kStreamSlack = 2,
  kStreamGenerator = 3,
  kStreamInit = 4,
};

}  // namespace mdpsmd
