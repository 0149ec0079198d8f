// Reproducible random streams: every (seed, env, episode) triple maps to an
// independent generator, so parallel rollouts and Monte Carlo campaigns are
// bitwise repeatable regardless of scheduling.
#ifndef HELIOS_RNG_HPP
#define HELIOS_RNG_HPP

#include <cstdint>
#include <random>

namespace helios {

class RngStream {
public:
    RngStream() : RngStream(0) {}
    explicit RngStream(std::uint64_t key);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform integer in [0, n).
    int uniform_int(int n);

    /// Standard normal via the Marsaglia polar method (spare value cached).
    double gaussian();

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Counter-style key construction: each component of the triple is absorbed
/// through a SplitMix64 round, so distinct triples yield unrelated streams.
/// `domain` separates independent uses of the same triple (env noise vs
/// policy sampling).
RngStream derive_stream(std::uint64_t global_seed, std::uint64_t env_index,
                        std::uint64_t episode_index, std::uint64_t domain = 0);

}  // namespace helios

#endif
