// timebase.hpp
//  Conversions between biological and technical (hardware) time. The
//  hardware runs 10^4 times faster than biology, so 1 ms biological time is
//  100 ns technical time. All simulator time is kept as integer nanoseconds;
//  the 4 ns HICANN grid and the 8 ns FPGA grid are derived views.
#ifndef PULSECOMM_TIMEBASE_HPP
#define PULSECOMM_TIMEBASE_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace pulsecomm
{

inline constexpr std::int64_t ns_per_bio_ms = 100;
inline constexpr std::int64_t hicann_tick_ns = 4; // 250 MHz
inline constexpr std::int64_t fpga_tick_ns = 8; // 125 MHz
inline constexpr int timestamp_bits = 15;
inline constexpr std::int64_t timestamp_modulus = std::int64_t{1}
        << timestamp_bits;
// Period after which the 15-bit HICANN timestamp wraps: 2^15 * 4 ns
inline constexpr std::int64_t wrap_period_ns =
        timestamp_modulus * hicann_tick_ns;

struct TimePoint
{
    std::int64_t tech_ns{0};

    constexpr auto operator<=>(const TimePoint &) const = default;
};

struct HicannTimestamp
{
    std::uint16_t ticks15{0};

    constexpr auto operator<=>(const HicannTimestamp &) const = default;
};

struct FpgaTick
{
    std::int64_t ticks8{0};

    constexpr auto operator<=>(const FpgaTick &) const = default;
};

enum class Rounding
{
    floor,
    ceil
};

struct WrappedTime
{
    HicannTimestamp ts;
    std::int64_t overflow_epoch{0};
};

TimePoint bio_to_tech(double t_bio_ms);
double tech_to_bio(TimePoint t);
FpgaTick to_fpga_tick(TimePoint t, Rounding mode);
TimePoint from_fpga_tick(FpgaTick tick);
HicannTimestamp wrap_timestamp(TimePoint t);
std::int64_t overflow_epoch_of(TimePoint t);
std::vector<TimePoint> unwrap_timestamps(std::span<const WrappedTime> records);

// Floor a technical time to the 4 ns HICANN clock grid
constexpr TimePoint floor_to_hicann_grid(TimePoint t)
{
    return TimePoint{(t.tech_ns / hicann_tick_ns) * hicann_tick_ns};
}

} // namespace pulsecomm

#endif
