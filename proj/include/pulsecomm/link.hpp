// link.hpp
//  One FPGA<->HICANN channel pair.
//
//  Downstream: bounded FIFO (16 entries) in front of a serializer that only
//  sends single pulse packets, one every 56 ns. A FIFO entry stays occupied
//  until its packet has left the serializer, so a pulse accepted behind 15
//  others waits at most 15 * 56 ns.
//
//  Upstream: bounded merger queue in front of a serializer that emits a
//  double pulse packet (80 ns) whenever two pulses are queued at an idle
//  instant and a single packet (56 ns) otherwise. The packet kind is never
//  changed once serialization has started.
#ifndef PULSECOMM_LINK_HPP
#define PULSECOMM_LINK_HPP

#include <cstdint>
#include <deque>
#include <functional>

#include "pulsecomm/events.hpp"
#include "pulsecomm/simcore.hpp"

namespace pulsecomm
{

struct LinkConfig
{
    int downstream_fifo_depth{16};
    // Serialization (56 ns) + this = baseline FPGA->HICANN latency of 230 ns
    std::int64_t fixed_link_latency_ns{174};
    // HICANN-side queue depth; calibrated against the pseudo-random loss
    // onset of a single upstream link
    int merger_depth{10};
    std::int64_t upstream_latency_ns{0};
};

void validate(const LinkConfig &config);

struct InFlightPulse
{
    PulseEvent pulse;
    std::uint64_t pulse_id{0};
};

struct ChannelStats
{
    std::uint64_t accepted{0};
    std::uint64_t dropped{0};
    std::uint64_t delivered{0};
    std::uint64_t packets_single{0};
    std::uint64_t packets_double{0};
    std::int64_t busy_ns{0};

    [[nodiscard]] std::uint64_t pushed() const { return accepted + dropped; }
    [[nodiscard]] double utilization(TimePoint duration) const;
};

using PulseSink = std::function<void(const InFlightPulse &)>;

class DownstreamChannel
{
public:
    // `deliver` runs as a HICANN-priority event at the arrival time
    DownstreamChannel(Engine &engine, const LinkConfig &config,
            GroundTruthLog *log, PulseSink deliver);
    DownstreamChannel(const DownstreamChannel &) = delete;
    DownstreamChannel &operator=(const DownstreamChannel &) = delete;

    // Offers a pulse at engine.now(); false if the FIFO was full
    bool push(const InFlightPulse &pulse);

    [[nodiscard]] const ChannelStats &stats() const { return stats_; }
    [[nodiscard]] std::size_t occupancy() const { return fifo_.size(); }

private:
    void start_serialization();
    void on_serialized();

    Engine &engine_;
    LinkConfig config_;
    GroundTruthLog *log_;
    PulseSink deliver_;
    std::deque<InFlightPulse> fifo_; // front is being serialized when busy_
    bool busy_{false};
    ChannelStats stats_;
};

class UpstreamChannel
{
public:
    // `deliver` runs as a trace-priority event once the packet is received
    UpstreamChannel(Engine &engine, const LinkConfig &config,
            GroundTruthLog *log, PulseSink deliver);
    UpstreamChannel(const UpstreamChannel &) = delete;
    UpstreamChannel &operator=(const UpstreamChannel &) = delete;

    bool push(const InFlightPulse &pulse);

    [[nodiscard]] const ChannelStats &stats() const { return stats_; }
    [[nodiscard]] std::size_t occupancy() const
    {
        return queue_.size() + in_flight_.size();
    }

private:
    void start_packet();
    void on_packet_sent();

    Engine &engine_;
    LinkConfig config_;
    GroundTruthLog *log_;
    PulseSink deliver_;
    std::deque<InFlightPulse> queue_;
    std::vector<InFlightPulse> in_flight_;
    ChannelStats stats_;
};

} // namespace pulsecomm

#endif
