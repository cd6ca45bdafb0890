// link.cpp
#include <string>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/link.hpp"

void pulsecomm::validate(const LinkConfig &config)
{
    if (config.downstream_fifo_depth < 1 || config.downstream_fifo_depth > 4096)
    {
        throw ConfigError("link.downstream_fifo_depth must be in [1, 4096]");
    }
    if (config.merger_depth < 1 || config.merger_depth > 4096)
    {
        throw ConfigError("link.merger_depth must be in [1, 4096]");
    }
    if (config.fixed_link_latency_ns < 0 || config.upstream_latency_ns < 0)
    {
        throw ConfigError("link latencies must be >= 0");
    }
}

double pulsecomm::ChannelStats::utilization(const TimePoint duration) const
{
    if (duration.tech_ns <= 0)
    {
        return 0.0;
    }
    return double(busy_ns) / double(duration.tech_ns);
}

pulsecomm::DownstreamChannel::DownstreamChannel(Engine &engine,
        const LinkConfig &config, GroundTruthLog *log, PulseSink deliver)
        : engine_(engine)
        , config_(config)
        , log_(log)
        , deliver_(std::move(deliver))
{
}

bool pulsecomm::DownstreamChannel::push(const InFlightPulse &pulse)
{
    if (fifo_.size() >= static_cast<std::size_t>(config_.downstream_fifo_depth))
    {
        ++stats_.dropped;
        if (log_ != nullptr)
        {
            log_->record(pulse.pulse_id, Stage::channel_drop, engine_.now());
        }
        return false;
    }
    ++stats_.accepted;
    if (log_ != nullptr)
    {
        log_->record(pulse.pulse_id, Stage::channel_enqueue, engine_.now());
    }
    fifo_.push_back(pulse);
    if (!busy_)
    {
        start_serialization();
    }
    return true;
}

void pulsecomm::DownstreamChannel::start_serialization()
{
    busy_ = true;
    const TimePoint occupancy = packet_occupancy(PacketKind::single);
    const TimePoint done{engine_.now().tech_ns + occupancy.tech_ns};
    ++stats_.packets_single;
    stats_.busy_ns += occupancy.tech_ns;

    const InFlightPulse pulse = fifo_.front();
    const TimePoint arrival{done.tech_ns + config_.fixed_link_latency_ns};
    engine_.schedule(arrival, Priority::hicann, [this, pulse]() {
        ++stats_.delivered;
        deliver_(pulse);
    });
    engine_.schedule(done, Priority::serializer, [this]() { on_serialized(); });
}

void pulsecomm::DownstreamChannel::on_serialized()
{
    fifo_.pop_front();
    busy_ = false;
    if (!fifo_.empty())
    {
        start_serialization();
    }
}

pulsecomm::UpstreamChannel::UpstreamChannel(Engine &engine,
        const LinkConfig &config, GroundTruthLog *log, PulseSink deliver)
        : engine_(engine)
        , config_(config)
        , log_(log)
        , deliver_(std::move(deliver))
{
}

bool pulsecomm::UpstreamChannel::push(const InFlightPulse &pulse)
{
    if (occupancy() >= static_cast<std::size_t>(config_.merger_depth))
    {
        ++stats_.dropped;
        if (log_ != nullptr)
        {
            log_->record(pulse.pulse_id, Stage::merger_drop, engine_.now());
        }
        return false;
    }
    ++stats_.accepted;
    queue_.push_back(pulse);
    if (in_flight_.empty())
    {
        start_packet();
    }
    return true;
}

void pulsecomm::UpstreamChannel::start_packet()
{
    const PacketKind kind =
            queue_.size() >= 2 ? PacketKind::double_pulse : PacketKind::single;
    const std::size_t n = (kind == PacketKind::single) ? 1 : 2;
    for (std::size_t i = 0; i < n; ++i)
    {
        in_flight_.push_back(queue_.front());
        queue_.pop_front();
    }
    if (kind == PacketKind::single)
    {
        ++stats_.packets_single;
    }
    else
    {
        ++stats_.packets_double;
    }
    const TimePoint occupancy = packet_occupancy(kind);
    stats_.busy_ns += occupancy.tech_ns;
    engine_.schedule(TimePoint{engine_.now().tech_ns + occupancy.tech_ns},
            Priority::serializer, [this]() { on_packet_sent(); });
}

void pulsecomm::UpstreamChannel::on_packet_sent()
{
    const TimePoint arrival{engine_.now().tech_ns + config_.upstream_latency_ns};
    for (const InFlightPulse &pulse : in_flight_)
    {
        engine_.schedule(arrival, Priority::trace, [this, pulse]() {
            ++stats_.delivered;
            if (log_ != nullptr)
            {
                log_->record(
                        pulse.pulse_id, Stage::upstream_delivered, engine_.now());
            }
            deliver_(pulse);
        });
    }
    in_flight_.clear();
    if (!queue_.empty())
    {
        start_packet();
    }
}
