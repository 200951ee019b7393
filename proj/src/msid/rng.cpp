#include "msid/rng.hpp"

#include <cmath>

namespace msid {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t user_seed, std::uint64_t stream) {
    std::uint64_t state = user_seed;
    std::uint64_t mixed = splitmix64_next(state);
    state = mixed ^ (stream + 0x9e3779b97f4a7c15ULL);
    return splitmix64_next(state);
}

double uniform53(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so the log argument never vanishes.
    double u1 = 1.0 - uniform53(gen_);
    double u2 = uniform53(gen_);
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace msid
