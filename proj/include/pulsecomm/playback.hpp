// playback.hpp
//  Packing of stimulus trains into playback memory pulse groups, and the
//  FPGA playback module that releases them onto the downstream channels.
//
//  Packing: every spike gets a desired release tick
//      d = ceil((t_tech - delay_compensation) / 8 ns), clamped at 0.
//  Pulses are merged in d order. A group opened at tick g keeps taking the
//  next pulse while it holds fewer than max_group_size pulses and the
//  pulse's d is not later than the tick it would be released at (g + its
//  position). The next group opens at max(d_next, g + size + overhead).
//  Pulses are therefore never released early, only late.
#ifndef PULSECOMM_PLAYBACK_HPP
#define PULSECOMM_PLAYBACK_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "pulsecomm/events.hpp"
#include "pulsecomm/link.hpp"
#include "pulsecomm/spikegen.hpp"

namespace pulsecomm
{

struct PackingConfig
{
    int max_group_size{static_cast<int>(max_group_pulses)};
    int group_overhead_cycles{6};
    // The record stamp is floored to 4 ns, so 228 ns of the nominal 230 ns
    // loopback latency keeps compensated delays non-negative
    std::int64_t delay_compensation_ns{228};
    int early_release_limit_cycles{0};
};

void validate(const PackingConfig &config);

struct PackedPulse
{
    std::uint8_t hicann{0};
    std::uint16_t label9{0};
    std::int64_t requested_ns{0}; // stimulus spike time in technical ns
    std::int64_t desired_tick{0};
    std::int64_t release_tick{0};

    [[nodiscard]] std::int64_t desired_ns() const { return desired_tick * fpga_tick_ns; }
    [[nodiscard]] std::int64_t actual_ns() const { return release_tick * fpga_tick_ns; }
    [[nodiscard]] std::int64_t shift_ns() const { return actual_ns() - desired_ns(); }
};

struct PackingReport
{
    std::vector<PackedPulse> pulses; // in image order
    std::size_t shifted{0};
    std::int64_t max_shift_ns{0};

    // pulse_id,hicann,label9,requested_ns,desired_ns,actual_ns,shift_ns
    void write_csv(std::ostream &out) const;
};

struct PackedImage
{
    PlaybackImage image;
    PackingReport report;
};

PackedImage pack(std::span<const LabeledTrain> trains, const PackingConfig &config);

// Throws CapacityError if the image does not fit the playback memory
MemoryUsage capacity(const PlaybackImage &image);

struct PlaybackSettings
{
    int group_overhead_cycles{6};
    int early_release_limit_cycles{0};
    // Number of passes through the image; > 1 enables loop mode
    int iterations{1};
};

class PlaybackModule
{
public:
    using Sink = std::function<void(const InFlightPulse &)>;

    // `requested_ns` holds the stimulus time of every image pulse in image
    // order (the packing report provides it). Each pass registers its pulses
    // in `log` when it starts.
    PlaybackModule(Engine &engine, PlaybackImage image,
            std::vector<std::int64_t> requested_ns,
            const PlaybackSettings &settings, GroundTruthLog *log, Sink sink);
    PlaybackModule(const PlaybackModule &) = delete;
    PlaybackModule &operator=(const PlaybackModule &) = delete;

    void start();

    // Loop period in FPGA ticks: first release to the end of the last
    // group's overhead
    [[nodiscard]] std::int64_t period_ticks() const { return period_ticks_; }
    [[nodiscard]] std::uint64_t released() const { return released_; }
    // Start tick of every group released so far
    [[nodiscard]] const std::vector<std::int64_t> &group_starts() const
    {
        return group_starts_;
    }

private:
    void begin_iteration(int k);
    void schedule_group(std::size_t g);
    void release_pulse(std::size_t g, std::size_t j, std::int64_t start_tick);

    Engine &engine_;
    PlaybackImage image_;
    std::vector<std::int64_t> requested_ns_;
    PlaybackSettings settings_;
    GroundTruthLog *log_;
    Sink sink_;
    std::vector<std::size_t> group_offset_; // index of a group's first pulse
    std::vector<std::uint64_t> pulse_ids_; // current iteration
    std::int64_t period_ticks_{0};
    int iteration_{0};
    std::int64_t prev_end_tick_{0};
    bool has_prev_{false};
    std::uint64_t released_{0};
    std::vector<std::int64_t> group_starts_;
};

} // namespace pulsecomm

#endif
