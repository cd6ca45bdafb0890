// simcore.cpp
#include <ostream>
#include <string>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/simcore.hpp"

std::uint64_t pulsecomm::Engine::schedule(const TimePoint time,
        const Priority priority, std::function<void()> action)
{
    if (time < now_)
    {
        throw InvariantViolation("event scheduled in the past: t=" +
                std::to_string(time.tech_ns) +
                " ns, now=" + std::to_string(now_.tech_ns) + " ns");
    }
    const std::uint64_t seq = next_seq_++;
    queue_.push(SimEvent{time, priority, seq, std::move(action)});
    return seq;
}

void pulsecomm::Engine::execute_next()
{
    // pop() only compares (time, priority, seq), which the move leaves intact
    SimEvent ev = std::move(const_cast<SimEvent &>(queue_.top()));
    queue_.pop();
    now_ = ev.time;
    if (observer_)
    {
        observer_(ev);
    }
    ++executed_;
    ev.action();
}

void pulsecomm::Engine::run_until(const TimePoint end)
{
    while (!queue_.empty() && queue_.top().time < end)
    {
        execute_next();
    }
}

void pulsecomm::Engine::run_all()
{
    while (!queue_.empty())
    {
        execute_next();
    }
}

const char *pulsecomm::stage_name(const Stage stage)
{
    switch (stage)
    {
    case Stage::requested:
        return "requested";
    case Stage::released:
        return "released";
    case Stage::channel_enqueue:
        return "channel_enqueue";
    case Stage::channel_drop:
        return "channel_drop";
    case Stage::hicann_arrival:
        return "hicann_arrival";
    case Stage::upstream_emit:
        return "upstream_emit";
    case Stage::merger_drop:
        return "merger_drop";
    case Stage::upstream_delivered:
        return "upstream_delivered";
    case Stage::trace_drop:
        return "trace_drop";
    case Stage::trace_record:
        return "trace_record";
    case Stage::cutoff:
        return "cutoff";
    }
    return "unknown";
}

bool pulsecomm::is_drop_stage(const Stage stage)
{
    return stage == Stage::channel_drop || stage == Stage::merger_drop ||
            stage == Stage::trace_drop || stage == Stage::cutoff;
}

std::uint64_t pulsecomm::GroundTruthLog::add_pulse(const std::uint8_t hicann,
        const std::uint16_t label9, const PulseOrigin origin,
        const Stage first_stage, const TimePoint t)
{
    PulseHistory h;
    h.hicann = hicann;
    h.label9 = label9;
    h.origin = origin;
    h.time_ns[static_cast<std::size_t>(first_stage)] = t.tech_ns;
    h.last_stage = first_stage;
    pulses_.push_back(h);
    return pulses_.size() - 1;
}

void pulsecomm::GroundTruthLog::record(
        const std::uint64_t pulse_id, const Stage stage, const TimePoint t)
{
    PulseHistory &h = pulses_.at(pulse_id);
    if (h.dropped() || h.traced())
    {
        throw InvariantViolation("pulse " + std::to_string(pulse_id) +
                " already terminated, cannot enter stage " + stage_name(stage));
    }
    h.time_ns[static_cast<std::size_t>(stage)] = t.tech_ns;
    h.last_stage = stage;
}

void pulsecomm::GroundTruthLog::finalize(const TimePoint end)
{
    for (PulseHistory &h : pulses_)
    {
        if (!h.dropped() && !h.traced())
        {
            h.time_ns[static_cast<std::size_t>(Stage::cutoff)] = end.tech_ns;
            h.last_stage = Stage::cutoff;
        }
    }
}

std::size_t pulsecomm::GroundTruthLog::traced_count() const
{
    std::size_t n = 0;
    for (const PulseHistory &h : pulses_)
    {
        n += h.traced() ? 1 : 0;
    }
    return n;
}

std::size_t pulsecomm::GroundTruthLog::dropped_count() const
{
    std::size_t n = 0;
    for (const PulseHistory &h : pulses_)
    {
        n += h.dropped() ? 1 : 0;
    }
    return n;
}

std::size_t pulsecomm::GroundTruthLog::dropped_at(const Stage stage) const
{
    std::size_t n = 0;
    for (const PulseHistory &h : pulses_)
    {
        n += (h.last_stage == stage) ? 1 : 0;
    }
    return n;
}

std::uint64_t pulsecomm::GroundTruthLog::hash() const
{
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    const auto mix = [&hash](std::uint64_t v) {
        for (int i = 0; i < 8; ++i)
        {
            hash ^= (v >> (8 * i)) & 0xFFU;
            hash *= 0x100000001B3ULL;
        }
    };
    mix(pulses_.size());
    for (const PulseHistory &h : pulses_)
    {
        mix(h.hicann);
        mix(h.label9);
        mix(static_cast<std::uint64_t>(h.origin));
        mix(static_cast<std::uint64_t>(h.last_stage));
        for (const std::int64_t t : h.time_ns)
        {
            mix(static_cast<std::uint64_t>(t));
        }
    }
    return hash;
}

void pulsecomm::GroundTruthLog::write_csv(std::ostream &out) const
{
    out << "pulse_id,stage,time_ns,dropped\n";
    for (std::size_t id = 0; id < pulses_.size(); ++id)
    {
        const PulseHistory &h = pulses_[id];
        for (std::size_t s = 0; s < stage_count; ++s)
        {
            if (h.time_ns[s] < 0)
            {
                continue;
            }
            const auto stage = static_cast<Stage>(s);
            out << id << ',' << stage_name(stage) << ',' << h.time_ns[s] << ','
                << (is_drop_stage(stage) ? 1 : 0) << '\n';
        }
    }
}
