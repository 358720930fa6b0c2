#include "clustermax/random_stream.hpp"

#include <cmath>
#include <random>

namespace clustermax {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) noexcept {
  const unsigned __int128 product = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(product >> 64);
  lo = static_cast<std::uint64_t>(product);
}

inline std::array<std::uint64_t, 4> round(const std::array<std::uint64_t, 4>& ctr,
                                          const std::array<std::uint64_t, 2>& key) noexcept {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, ctr[0], hi0, lo0);
  mulhilo(kMul1, ctr[2], hi1, lo1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) noexcept {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

void RandomStream::refill() noexcept {
  buffer_ = philox4x64({block_, id_.substream, id_.replication, id_.horizon}, {id_.seed, 0});
  ++block_;
  pos_ = 0;
}

double RandomStream::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

std::uint64_t RandomStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(*this);
}

std::uint64_t RandomStream::geometric_trials(double p) noexcept {
  if (p >= 1.0) return 1;
  const double trials = std::floor(std::log(uniform()) / std::log1p(-p)) + 1.0;
  if (!(trials < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(trials);
}

double RandomStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(*this);
}

}  // namespace clustermax
