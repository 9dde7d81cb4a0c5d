#pragma once

#include <array>
#include <cstdint>

namespace pioneer {

// Philox4x32-10 counter-based generator. A stream is identified by
// (seed, stream id); draws are a pure function of (seed, stream, position).
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    std::uint32_t next_u32() noexcept {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() noexcept {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // uniform in [0, 1) with 53 random bits
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), n > 0 (Lemire's method)
    std::uint32_t below(std::uint32_t n) noexcept {
        std::uint64_t m = std::uint64_t(next_u32()) * n;
        auto low = static_cast<std::uint32_t>(m);
        if (low < n) {
            std::uint32_t thresh = (0u - n) % n;
            while (low < thresh) {
                m = std::uint64_t(next_u32()) * n;
                low = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    std::uint64_t below64(std::uint64_t n) noexcept {
        if (n <= 0xffffffffull) return below(static_cast<std::uint32_t>(n));
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            std::uint64_t thresh = (0ull - n) % n;
            while (low < thresh) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // one of the 2d lattice directions
    unsigned direction(int dim) noexcept {
        if (dim == 2) {
            if (bits_left_ == 0) {
                bits_ = next_u32();
                bits_left_ = 16;
            }
            unsigned d = bits_ & 3u;
            bits_ >>= 2;
            --bits_left_;
            return d;
        }
        return below(6);
    }

  private:
    void refill() noexcept {
        std::array<std::uint32_t, 4> c = ctr_;
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
            std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = c;
        pos_ = 0;
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    std::uint32_t bits_ = 0;
    int bits_left_ = 0;
};

// splitmix64 finalizer, used to derive sub-stream ids
inline std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b) noexcept { return mix64(mix64(a) ^ b); }

}  // namespace pioneer
