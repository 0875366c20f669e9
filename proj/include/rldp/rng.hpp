#pragma once

// Deterministic, splittable random streams.
//
// Stream fan-out contract (stable across platforms and worker schedules):
//   worker k of a run with master seed m draws from
//   Stream(substream_seed(m, k)), where substream_seed chains splitmix64
//   over (m, k+1). Two streams with equal seeds emit identical sequences.
// All samplers are inverse-CDF / closed-form transforms of uniforms, so a
// sample sequence is a pure function of the seed — no library distribution
// state involved.

#include <cmath>
#include <cstdint>

namespace rldp {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t substream_seed(uint64_t master, uint64_t worker) {
    uint64_t s = master;
    uint64_t a = splitmix64(s);
    s = a ^ (0x9E3779B97F4A7C15ull * (worker + 1));
    return splitmix64(s);
}

// xoshiro256++ (public-domain construction), seeded via splitmix64.
class Stream {
  public:
    explicit Stream(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

    // Uniform on (0, 1]: strictly positive so log() is always defined.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1p-53; }

    // Uniform on (0, 1) (both ends open).
    double uniform_open() {
        double u;
        do { u = static_cast<double>(next_u64() >> 11) * 0x1p-53; } while (u == 0.0);
        return u;
    }

    double exponential(double lambda) { return -std::log(uniform_pos()) / lambda; }

    // Standard normal via Box-Muller; one value per call, no cached state.
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform_pos();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double cauchy() { return std::tan(3.141592653589793238 * (uniform_open() - 0.5)); }

    // S with survival P[S > s] = exp(-s^2): inverse transform.
    double gaussian_tail_wait() { return std::sqrt(-std::log(uniform_pos())); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

} // namespace rldp
