#pragma once

#include <cstddef>
#include <cstdint>

namespace leotopo {

// xoshiro256** seeded via splitmix64. Hand-rolled so that seeded runs are
// reproducible across compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    // Uniform in [0, 1).
    double uniform01();

    // Uniform integer in [0, n); n must be > 0.
    std::size_t uniform_below(std::size_t n);

    // Box-Muller normal draw.
    double normal(double mean, double stddev);

private:
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace leotopo
