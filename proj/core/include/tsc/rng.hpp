#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tsc {

// Deterministic random stream. All distributions are hand-rolled on top of
// mt19937_64 so that sequences are identical across standard libraries; the
// std:: distribution adapters are implementation-defined and would break
// byte-identical regeneration.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1) with 53 bits of randomness
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] without modulo bias
    int64_t uniform_int(int64_t lo, int64_t hi);

    // standard normal, Box-Muller (no cached spare: keeps the stream
    // position a pure function of the call count)
    double normal();

    // Exp(1)
    double exponential();

    // index sampled from unnormalized nonnegative weights
    size_t categorical(const std::vector<double>& weights);

    // Dirichlet(alpha=1) over n categories, i.e. normalized Exp(1) draws
    std::vector<double> dirichlet_uniform(size_t n);

private:
    std::mt19937_64 engine_;
};

// Mixes seed material into a child-stream seed (splitmix64 finalizer).
uint64_t mix_seed(uint64_t base, uint64_t a = 0, uint64_t b = 0);

}  // namespace tsc
