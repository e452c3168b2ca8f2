#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace framepipe {

// Seeded generator with hand-defined value mappings. std::mt19937_64 output
// is pinned by the standard, but the distribution adaptors are not; mapping
// bits ourselves keeps trace files and reports byte-identical across
// toolchains for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is negligible for n << 2^64 and
    // the mapping is identical everywhere.
    std::uint64_t below(std::uint64_t n) { return n ? eng_() % n : 0; }

    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[below(items.size())];
    }

    // Box-Muller; consumes two draws per pair, caches the second.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * 3.141592653589793 * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * 3.141592653589793 * u2);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace framepipe
