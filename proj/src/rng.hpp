#pragma once
#include <cstdint>
#include <cmath>

namespace orpca {

// SplitMix64 with fixed named streams. Generator version 1: datasets are
// reproducible from (seed, stream tag) alone, so refactors cannot silently
// change fixtures. Stream state starts at seed XOR (tag * odd constant).
class rng {
public:
    enum stream : uint64_t {
        stream_u = 1,        // left factor entries
        stream_vcoef = 2,    // right factor entries
        stream_support = 3,  // corruption support shuffle
        stream_values = 4,   // corruption magnitudes
        stream_init = 0xB5,  // misc initialization draws
    };

    rng(uint64_t seed, uint64_t tag)
        : state_(seed ^ (tag * 0xD2B74407B1CE6E93ULL)), have_spare_(false) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1), 53-bit resolution
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // unbiased integer in [0, n) via 128-bit multiply-shift
    uint64_t next_below(uint64_t n) {
        return uint64_t((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // standard normal via Box-Muller; second value cached
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - next_double();  // (0,1], keeps log finite
        double u2 = next_double();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * M_PI * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    uint64_t state_;
    bool have_spare_;
    double spare_ = 0.0;
};

}  // namespace orpca
