#pragma once

#include <cstdint>
#include <random>

namespace msid {

// All randomness in the library flows through mt19937_64 streams whose seeds
// are derived with splitmix64 from a user seed and a stream index. Floating
// point draws use explicit bit manipulation instead of the standard
// distributions, whose output is implementation defined.

/// One splitmix64 step (Steele, Lea, Flood 2014). Advances `state`.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Seed for stream `stream` of the generator family keyed by `user_seed`.
/// Different stream indices give decorrelated mt19937_64 streams even for
/// adjacent user seeds.
std::uint64_t stream_seed(std::uint64_t user_seed, std::uint64_t stream);

/// Uniform double in [0, 1) from the top 53 bits of one mt19937_64 draw.
double uniform53(std::mt19937_64& gen);

/// Standard normal draws via the Box-Muller transform on uniform53 pairs.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

    double next();

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace msid
