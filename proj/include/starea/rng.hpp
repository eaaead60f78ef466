#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace starea {

// Philox4x32-10 (Salmon et al., SC'11).
struct Philox4x32 {
    using ctr_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static ctr_type apply(ctr_type c, key_type k) {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = std::uint64_t(M0) * c[0];
            std::uint64_t p1 = std::uint64_t(M1) * c[2];
            ctr_type n{std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
                       std::uint32_t(p0)};
            c = n;
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }
};

// Normal variates for one (path, stream): the counter is
// (block, stream, path_lo, path_hi), the key is the master seed.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, path_(path), stream_(stream) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Marsaglia polar method, one counter block per attempt
        for (;;) {
            auto w = Philox4x32::apply({block_++, stream_, std::uint32_t(path_), std::uint32_t(path_ >> 32)}, key_);
            std::uint64_t a = (std::uint64_t(w[0]) << 21) ^ (w[1] >> 11);
            std::uint64_t b = (std::uint64_t(w[2]) << 21) ^ (w[3] >> 11);
            double u = double(a) * 0x1.0p-52 - 1.0;
            double v = double(b) * 0x1.0p-52 - 1.0;
            double q = u * u + v * v;
            if (q >= 1.0 || q == 0.0) continue;
            double f = std::sqrt(-2.0 * std::log(q) / q);
            spare_ = v * f;
            have_spare_ = true;
            return u * f;
        }
    }

    // uniform in (0,1), consuming a whole block
    double uniform() {
        have_spare_ = false;
        auto w = Philox4x32::apply({block_++, stream_, std::uint32_t(path_), std::uint32_t(path_ >> 32)}, key_);
        std::uint64_t a = (std::uint64_t(w[0]) << 21) ^ (w[1] >> 11);
        return (double(a) + 0.5) * 0x1.0p-53;
    }

  private:
    Philox4x32::key_type key_;
    std::uint64_t path_;
    std::uint32_t stream_;
    std::uint32_t block_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace starea
