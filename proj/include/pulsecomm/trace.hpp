// trace.hpp
//  FPGA trace module and trace memory.
//
//  Each upstream channel ends in its own FPGA FIFO. Every 8 ns cycle the
//  module takes up to two pulses out of these FIFOs, round robin starting
//  after the channel served last, and appends them to trace memory.
//
//  A record keeps the HICANN's 15-bit timestamp plus the overflow epoch that
//  timestamp belongs to. The epoch is derived from the FPGA counter at
//  recording time, stepped back by one when the timestamp is ahead of the
//  counter (the pulse was stamped before the last wrap).
#ifndef PULSECOMM_TRACE_HPP
#define PULSECOMM_TRACE_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pulsecomm/link.hpp"
#include "pulsecomm/spikegen.hpp"

namespace pulsecomm
{

struct TraceConfig
{
    int fifo_depth{64};
    std::int64_t capacity{playback_capacity_pulses};
    int pulses_per_cycle{2};
};

void validate(const TraceConfig &config);

struct TraceRecord
{
    std::uint8_t hicann{0};
    std::uint16_t label9{0};
    HicannTimestamp ts{};
    std::int64_t overflow_epoch{0};
    std::uint64_t record_order{0};
    std::uint64_t pulse_id{0}; // ground truth id; not part of the exports

    [[nodiscard]] TimePoint absolute() const
    {
        return TimePoint{overflow_epoch * wrap_period_ns
                + std::int64_t{ts.ticks15} * hicann_tick_ns};
    }
};

struct TraceMemory
{
    std::vector<TraceRecord> records;
    std::int64_t capacity{playback_capacity_pulses};
    std::int64_t overflow_markers{0};
    bool full{false};
    std::array<std::uint64_t, hicanns_per_fpga> fifo_drops{};
    std::uint64_t capacity_drops{0};

    [[nodiscard]] std::uint64_t drops() const;
    // Appends unless full; returns false (and sets `full`) when refused
    bool append(TraceRecord record);
};

class TraceModule
{
public:
    TraceModule(Engine &engine, const TraceConfig &config, GroundTruthLog *log);
    TraceModule(const TraceModule &) = delete;
    TraceModule &operator=(const TraceModule &) = delete;

    // Upstream delivery into FPGA FIFO `pulse.pulse.hicann` at engine.now()
    void push(const InFlightPulse &pulse);
    // Counter reset at t = k * 131072 ns
    void insert_overflow_marker(TimePoint t);

    [[nodiscard]] const TraceMemory &memory() const { return memory_; }
    [[nodiscard]] TraceMemory take_memory() { return std::move(memory_); }

private:
    void schedule_cycle();
    void on_cycle();

    Engine &engine_;
    TraceConfig config_;
    GroundTruthLog *log_;
    std::array<std::deque<InFlightPulse>, hicanns_per_fpga> fifos_;
    std::size_t next_channel_{0};
    std::int64_t last_cycle_ns_{-fpga_tick_ns};
    bool cycle_pending_{false};
    TraceMemory memory_;
};

// Epoch of a pulse stamped `ts` and recorded at FPGA time `now`
std::int64_t record_epoch(HicannTimestamp ts, TimePoint now);

// Absolute spike trains per (hicann, label9), sorted by key and time.
// Throws FormatError if a channel's epochs ever decrease.
std::vector<LabeledTrain> to_spike_trains(const TraceMemory &memory);

// record_order,hicann,label9,ts15,epoch,abs_ns,bio_ms
void write_trace_csv(std::ostream &out, const TraceMemory &memory);
TraceMemory read_trace_csv(std::istream &in);

// 32-bit words: a trace_record word per record, preceded by an
// overflow_marker word holding the absolute epoch whenever it changes
std::vector<std::uint32_t> encode_trace(const TraceMemory &memory);
TraceMemory decode_trace(std::span<const std::uint32_t> words);

} // namespace pulsecomm

#endif
