#pragma once

#include <cmath>
#include <cstdint>

namespace pmfseg {

// splitmix64; used to derive independent per-item streams from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// xoshiro-free, minimal generator with portable output. std::mt19937_64 would
// work for the engine but the std distributions are implementation-defined,
// so all sampling goes through the helpers below.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : state_(seed ? seed : 0x853c49e6748fea9bULL) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) { return n ? next_u64() % n : 0; }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(uniform_int(static_cast<uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call (second value discarded for simplicity)
    double normal(double mean = 0.0, double sigma = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
        return mean + sigma * z;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    uint64_t state_;
};

}  // namespace pmfseg
