#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fluctrel {

// Philox-4x64-10 counter-based generator (Salmon et al., SC 2011).
// A draw is a pure function of (key, counter), so every stream position can
// be addressed directly: results never depend on scheduling or worker count.
class Philox4x64 {
 public:
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter block(Key key, Counter ctr) {
    for (int round = 0; round < 10; ++round) {
      ctr = one_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                      std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
  }

  static Counter one_round(const Counter& c, const Key& k) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// Disjoint sub-stream domains. Keeping initial-condition sampling, path
// noise, etc. in separate domains means variable consumption in one (e.g.
// rejection sampling) cannot shift another.
enum class RngDomain : std::uint64_t {
  path_noise = 0,
  initial_condition = 1,
  bootstrap = 2,
  auxiliary = 3,
};

// One logical random stream, identified by (seed, index, domain). Values
// depend only on (seed, index, domain, position).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t index,
            RngDomain domain = RngDomain::path_noise)
      : seed_(seed), index_(index), domain_(static_cast<std::uint64_t>(domain)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t index() const { return index_; }
  std::uint64_t position() const { return pos_; }

  void seek(std::uint64_t position) {
    pos_ = position;
    cached_block_ = ~std::uint64_t{0};
  }

  // Uniform on the open interval (0,1); 53-bit resolution.
  double uniform() { return to_unit(word_at(pos_++)); }

  // Standard normal via Box-Muller on two addressed uniforms.  Each position
  // yields one normal; pairs share the two underlying uniforms.
  double normal() {
    std::uint64_t p = pos_++;
    std::uint64_t pair = p / 2;
    double u1 = to_unit(word_at(2 * pair));
    double u2 = to_unit(word_at(2 * pair + 1));
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    return (p % 2 == 0) ? r * std::cos(a) : r * std::sin(a);
  }

  template <typename Derived>
  void fill_normal(Derived& out) {
    for (int i = 0; i < static_cast<int>(out.size()); ++i) out[i] = normal();
  }

 private:
  static double to_unit(std::uint64_t w) {
    return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t word_at(std::uint64_t pos) {
    std::uint64_t blk = pos / 4;
    if (blk != cached_block_) {
      Philox4x64::Key key{seed_, seed_ ^ 0xA5A5A5A55A5A5A5AULL};
      Philox4x64::Counter ctr{blk, domain_, index_, 0};
      cache_ = Philox4x64::block(key, ctr);
      cached_block_ = blk;
    }
    return cache_[pos % 4];
  }

  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t domain_;
  std::uint64_t pos_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  Philox4x64::Counter cache_{};
};

}  // namespace fluctrel
