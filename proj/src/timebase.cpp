// timebase.cpp
#include <cmath>
#include <string>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/timebase.hpp"

pulsecomm::TimePoint pulsecomm::bio_to_tech(const double t_bio_ms)
{
    if (!(t_bio_ms >= 0.0) || !std::isfinite(t_bio_ms))
    {
        throw DomainError("bio_to_tech: time must be finite and >= 0, got " +
                std::to_string(t_bio_ms));
    }
    // llround rounds half away from zero
    return TimePoint{std::llround(t_bio_ms * double(ns_per_bio_ms))};
}

double pulsecomm::tech_to_bio(const TimePoint t)
{
    return double(t.tech_ns) / double(ns_per_bio_ms);
}

pulsecomm::FpgaTick pulsecomm::to_fpga_tick(
        const TimePoint t, const Rounding mode)
{
    if (t.tech_ns < 0)
    {
        throw DomainError("to_fpga_tick: negative time");
    }
    std::int64_t ticks = t.tech_ns / fpga_tick_ns;
    if (mode == Rounding::ceil && (t.tech_ns % fpga_tick_ns) != 0)
    {
        ++ticks;
    }
    return FpgaTick{ticks};
}

pulsecomm::TimePoint pulsecomm::from_fpga_tick(const FpgaTick tick)
{
    return TimePoint{tick.ticks8 * fpga_tick_ns};
}

pulsecomm::HicannTimestamp pulsecomm::wrap_timestamp(const TimePoint t)
{
    const std::int64_t ticks = t.tech_ns / hicann_tick_ns;
    return HicannTimestamp{
            static_cast<std::uint16_t>(ticks % timestamp_modulus)};
}

std::int64_t pulsecomm::overflow_epoch_of(const TimePoint t)
{
    return t.tech_ns / wrap_period_ns;
}

std::vector<pulsecomm::TimePoint> pulsecomm::unwrap_timestamps(
        std::span<const WrappedTime> records)
{
    std::vector<TimePoint> out;
    out.reserve(records.size());
    std::int64_t last_epoch = 0;
    for (std::size_t i = 0; i < records.size(); ++i)
    {
        const WrappedTime &r = records[i];
        if (r.overflow_epoch < last_epoch || r.overflow_epoch < 0)
        {
            throw FormatError("unwrap_timestamps: overflow epoch decreases", i);
        }
        if (r.ts.ticks15 >= timestamp_modulus)
        {
            throw FormatError("unwrap_timestamps: timestamp exceeds 15 bits", i);
        }
        last_epoch = r.overflow_epoch;
        out.push_back(TimePoint{r.overflow_epoch * wrap_period_ns +
                std::int64_t{r.ts.ticks15} * hicann_tick_ns});
    }
    return out;
}
