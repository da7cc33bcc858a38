#ifndef BRANCHMAX_RNG_HPP
#define BRANCHMAX_RNG_HPP

#include <cmath>
#include <cstdint>

namespace branchmax {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

// Counter-based stream: the sequence is a pure function of the key, so any
// (seed, replicate, particle) triple can be mapped to an independent stream
// without coordination between workers. This is what makes results identical
// for every worker count.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : state_(mix64(key ^ 0x6A09E667F3BCC909ULL)) {}

    static CounterRng keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
        std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
        h = hash_combine(h, a);
        h = hash_combine(h, b);
        h = hash_combine(h, c);
        return CounterRng(h);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform on the open interval (0,1); never returns 0 or 1, so logs are safe.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // Box-Muller, cosine branch only. Two uniforms per variate, fixed draw count.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Inversion by search; fine for the small means used by the grid backend.
    int poisson(double mean) {
        double p = std::exp(-mean);
        double cum = p;
        double u = uniform();
        int k = 0;
        while (u > cum && k < 10000) {
            ++k;
            p *= mean / k;
            cum += p;
        }
        return k;
    }

private:
    std::uint64_t state_;
};

// Standard alpha-stable variate S_alpha(1, beta, 0), alpha in (1,2], via the
// Chambers-Mallows-Stuck transform. Zero shift means zero mean for alpha > 1.
inline double stable_standard(double alpha, double beta, CounterRng& rng) {
    const double pi = 3.14159265358979323846;
    double v = pi * (rng.uniform() - 0.5);
    double w = rng.exponential(1.0);
    if (alpha == 2.0) {
        return 2.0 * std::sqrt(w) * std::sin(v);
    }
    double t = beta * std::tan(pi * alpha / 2.0);
    double b = std::atan(t) / alpha;
    double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
    double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
               std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
    return x;
}

} // namespace branchmax

#endif
