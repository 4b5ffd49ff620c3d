#pragma once

#include <cstdint>
#include <random>

namespace powerplan::random {

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Key for the stream owned by (seed, replicate, experiment, purpose). Streams
// depend only on these counters, never on scheduling order.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replicate, std::uint64_t experiment = 0,
                         std::uint64_t purpose = 0);

// mt19937_64 engine with portable transforms on top of its raw output.
class Stream {
public:
    explicit Stream(std::uint64_t key) : engine_(key) {}

    // Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    // Gamma(shape, 1), Marsaglia-Tsang.
    double gamma(double shape);
    double chi_squared(double nu) { return 2.0 * gamma(0.5 * nu); }

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace powerplan::random
