#include "helios/rng.hpp"

#include <cmath>

namespace helios {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t key) : gen_(key) {}

std::uint64_t RngStream::next_u64() { return gen_(); }

double RngStream::uniform01() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

int RngStream::uniform_int(int n) {
    // Rejection sampling keeps the distribution exactly uniform.
    const std::uint64_t un = std::uint64_t(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return int(x % un);
}

double RngStream::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

RngStream derive_stream(std::uint64_t global_seed, std::uint64_t env_index,
                        std::uint64_t episode_index, std::uint64_t domain) {
    std::uint64_t state = global_seed;
    std::uint64_t key = splitmix64(state);
    state ^= env_index + 0x1000000000000001ULL;
    key ^= splitmix64(state);
    state ^= episode_index + 0x2000000000000003ULL;
    key ^= splitmix64(state);
    state ^= domain + 0x3000000000000005ULL;
    key ^= splitmix64(state);
    return RngStream(key);
}

}  // namespace helios
