#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace clustermax {

// Philox4x64-10 block function (Salmon et al., Random123). Pure: the same
// (counter, key) always yields the same four words.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) noexcept;

// Identifies one independent stream. Streams with distinct ids never share a
// Philox counter block, so the mapping id -> draws is injective by construction.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t horizon = 0;
  std::uint64_t substream = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

// Counter-based random stream. Satisfies UniformRandomBitGenerator, so the
// standard <random> distributions can draw from it directly.
//
// Layout: key = {seed, 0}; counter = {block, substream, replication, horizon}.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(StreamId id) noexcept : id_(id) {}
  RandomStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t horizon) noexcept
      : RandomStream(StreamId{seed, replication, horizon, 0}) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == buffer_.size()) refill();
    return buffer_[pos_++];
  }

  // Uniform on the open interval (0, 1); 53 bits of resolution.
  double uniform() noexcept;
  double exponential(double rate) noexcept;
  std::uint64_t poisson(double mean);
  // Number of Bernoulli(p) trials up to and including the first success.
  // Saturates at the largest uint64 for vanishing p.
  std::uint64_t geometric_trials(double p) noexcept;
  double gamma(double shape, double scale);

  // Independent child stream sharing this stream's id except the substream word.
  RandomStream substream(std::uint64_t index) const noexcept {
    StreamId child = id_;
    child.substream = index;
    return RandomStream(child);
  }

  const StreamId& id() const noexcept { return id_; }
  std::uint64_t blocks_consumed() const noexcept { return block_; }

 private:
  void refill() noexcept;

  StreamId id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  std::size_t pos_ = 4;
};

// Stream for one (replication, horizon) task of an experiment.
inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t replication,
                                  std::uint64_t horizon_index) noexcept {
  return RandomStream(master_seed, replication, horizon_index);
}

}  // namespace clustermax
