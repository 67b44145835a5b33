#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace kdvlab {

// Counter-based RNG: Philox4x64-10. Every draw is a pure function of
// (key, counter), so ensembles can hand out one named stream per
// (path, mode) pair and stay bit-reproducible under any thread count.
// Output matches numpy.random.Philox for the same counter/key.
namespace philox {

using u64 = std::uint64_t;

inline u64 mulhi(u64 a, u64 b) {
  return static_cast<u64>((static_cast<__uint128_t>(a) * b) >> 64);
}

inline std::array<u64, 4> block(std::array<u64, 4> ctr, std::array<u64, 2> key) {
  constexpr u64 M0 = 0xD2E7470EE14C6C93ULL, M1 = 0xCA5A826395121157ULL;
  constexpr u64 W0 = 0x9E3779B97F4A7C15ULL, W1 = 0xBB67AE8584CAA73BULL;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += W0;
      key[1] += W1;
    }
    const u64 hi0 = mulhi(M0, ctr[0]), lo0 = M0 * ctr[0];
    const u64 hi1 = mulhi(M1, ctr[2]), lo1 = M1 * ctr[2];
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// word -> uniform double in [0, 1), 53 random bits.
inline double u01(u64 w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }
// word -> uniform double in (0, 1]; safe as a log() argument.
inline double u01_inc(u64 w) { return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53; }

}  // namespace philox

// Stream naming. Purposes keep independent consumers (SPDE noise, effective
// noise, quadrature shifts, ...) from colliding on the same Philox key.
enum class StreamPurpose : std::uint64_t {
  spde_noise = 1,
  effective_noise = 2,
  initial_data = 3,
  quadrature = 4,
  analysis = 5,
  scratch = 6,
  fast_noise = 7,
};

inline std::uint64_t stream_id(StreamPurpose p, std::uint64_t path, std::uint64_t sub) {
  // 8 bits purpose | 28 bits path | 28 bits sub-stream (mode, node, ...).
  return (static_cast<std::uint64_t>(p) << 56) | ((path & 0xFFFFFFFULL) << 28) |
         (sub & 0xFFFFFFFULL);
}

struct GaussPair {
  double x, y;
};

// One Philox block per call; lanes 0/1 feed a Box-Muller pair.
inline GaussPair gauss_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  const auto b = philox::block({step, 0, 0, 0}, {seed, stream});
  const double u1 = philox::u01_inc(b[0]);
  const double u2 = philox::u01(b[1]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  constexpr double two_pi = 6.283185307179586476925286766559;
  return {r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
}

inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                        int lane = 0) {
  const auto b = philox::block({step, 0, 0, 0}, {seed, stream});
  return philox::u01(b[lane & 3]);
}

// Sequential convenience wrapper over the stateless API.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  double uniform() { return philox::u01(next_word()); }
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const GaussPair g = gauss_pair(seed_, stream_, gauss_step_++ | (1ULL << 62));
    spare_ = g.y;
    have_spare_ = true;
    return g.x;
  }

 private:
  philox::u64 next_word() {
    if (lane_ == 4) {
      lane_ = 0;
      ++step_;
    }
    if (lane_ == 0) buf_ = philox::block({step_, 0, 0, 0}, {seed_, stream_});
    return buf_[lane_++];
  }

  std::uint64_t seed_, stream_;
  philox::u64 step_ = 0;
  int lane_ = 0;
  std::array<philox::u64, 4> buf_{};
  philox::u64 gauss_step_ = 0;
  double spare_ = 0;
  bool have_spare_ = false;
};

// FNV-1a, used for config hashes in run manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace kdvlab
