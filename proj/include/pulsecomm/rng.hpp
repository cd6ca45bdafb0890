// rng.hpp
//  Counter-based 64-bit generator (SplitMix64 finalizer applied to
//  key + counter * golden gamma). Each (seed, stream) pair gives an
//  independent sequence, so trains can be generated in any order or in
//  parallel and stay bit-identical.
#ifndef PULSECOMM_RNG_HPP
#define PULSECOMM_RNG_HPP

#include <cstdint>

namespace pulsecomm
{

constexpr std::uint64_t splitmix64_mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class CounterRng
{
public:
    static constexpr std::uint64_t gamma = 0x9E3779B97F4A7C15ULL;

    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
            : key_(splitmix64_mix(seed ^ splitmix64_mix(stream + gamma)))
    {
    }

    constexpr std::uint64_t next_u64()
    {
        ++counter_;
        return splitmix64_mix(key_ + counter_ * gamma);
    }
    // Uniform on [0, 1) with 53 bits of resolution
    constexpr double next_uniform()
    {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }
    // Uniform on (0, 1)
    constexpr double next_open_uniform()
    {
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
    double next_exponential(double mean);

    [[nodiscard]] constexpr std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_{0};
};

} // namespace pulsecomm

#endif
