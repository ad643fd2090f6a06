#pragma once

#include <cstdint>

namespace hyfed {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen for the workload generator
// and everything else that must be bit-reproducible across platforms:
// the whole state is one u64, splitting is a single mix, and the output
// sequence is fixed by the algorithm, not by any library implementation.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Derive an independent generator (e.g. per query / per component).
    SplitMix64 split() { return SplitMix64(next()); }

    // Uniform in [0,1) with 53 bits of resolution.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0,n); n must be > 0. Fixed-point multiply keeps
    // the draw deterministic and branch-free.
    uint64_t next_below(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next()) * n) >> 64);
    }

private:
    uint64_t state_;
};

// The one-shot mix function underlying SplitMix64; used to spread hashes.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace hyfed
