#ifndef WLDP_RNG_HPP
#define WLDP_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace wldp {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A (seed, stream) pair selects an independent sequence; the counter walks
/// through it. Replica r of an experiment uses stream r, so results do not
/// depend on the order in which replicas are scheduled.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (idx_ == 4) {
      out_ = block(ctr_, key_);
      bump();
      idx_ = 0;
    }
    return out_[idx_++];
  }

  /// Uniform double in (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)() >> 5;
    const std::uint64_t lo = (*this)() >> 6;
    return (static_cast<double>(hi * 67108864ULL + lo) + 0.5) * (1.0 / 9007199254740992.0);
  }

  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
  }

 private:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  static Block block(Block c, Key k) {
    constexpr std::uint32_t M0 = 0xD2511F53, M1 = 0xCD9E8D57;
    constexpr std::uint32_t W0 = 0x9E3779B9, W1 = 0xBB67AE85;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(M0, c[0], hi0, lo0);
      mulhilo(M1, c[2], hi1, lo1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
      k[0] += W0;
      k[1] += W1;
    }
    return c;
  }

  void bump() {
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  Key key_;
  Block ctr_;
  Block out_{};
  int idx_ = 4;
};

/// Standard normal draw via Marsaglia's polar method. Implemented here rather
/// than with std::normal_distribution so streams are identical across
/// standard libraries.
template <class Gen>
double standard_normal(Gen& gen) {
  for (;;) {
    const double u = 2.0 * gen.uniform() - 1.0;
    const double v = 2.0 * gen.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace wldp

#endif  // WLDP_RNG_HPP
