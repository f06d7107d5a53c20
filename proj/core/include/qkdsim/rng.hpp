#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace qkd {

/// 64-bit FNV-1a over a byte string; used to turn substream labels into seeds.
constexpr uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic random source. All protocol randomness flows through
/// explicitly passed Rng handles; a session derives one substream per labeled
/// role from its master seed, so equal seeds reproduce runs bit for bit.
/// Uniform draws are implemented here rather than with std distributions,
/// whose output is not pinned down by the standard.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    static Rng substream(uint64_t master_seed, std::string_view label) {
        return Rng(splitmix64(master_seed ^ fnv1a64(label)));
    }

    uint64_t next_u64() { return engine_(); }

    bool next_bit() { return engine_() & 1u; }

    /// Uniform integer in [0, n); n must be nonzero. Rejection sampling, so
    /// the result is exactly uniform.
    uint64_t next_below(uint64_t n) {
        const uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const uint64_t r = engine_();
            if (r >= reject_below) return r % n;
        }
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by Rng (std::shuffle's draw sequence is
/// implementation-defined, which would break transcript reproducibility).
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace qkd
