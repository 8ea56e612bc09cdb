#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace tracelab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of (counter, key).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key) noexcept;

// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Stable 64-bit id for an experiment name (FNV-1a).
std::uint64_t experiment_id(std::string_view name) noexcept;

// Maps the top 53 bits of a word to [0, 1).
inline double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t experiment = 0;
  std::uint64_t trial = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

// Counter-based random stream. The i-th 128-bit block of a stream is philox(i, trial; key(seed,
// experiment)), so draws depend only on the key triple and the position, never on scheduling.
// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t experiment = 0, std::uint64_t trial = 0);

  const StreamKey& key() const noexcept { return key_; }

  // Independent child stream, e.g. one per trial: same seed/experiment, derived trial id.
  RngStream substream(std::uint64_t id) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  double uniform();       // [0, 1)
  double normal();        // Box-Muller, standard normal
  double rademacher();    // +1 or -1 with equal probability
  std::uint64_t below(std::uint64_t bound);  // uniform integer in [0, bound)

 private:
  void refill();

  StreamKey key_;
  PhiloxKey philox_key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tracelab
