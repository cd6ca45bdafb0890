// simcore.hpp
//  Discrete-event engine and the per-pulse ground truth log.
//
//  Events are totally ordered by (time, priority, seq). Priorities fix the
//  order of simultaneous events: playback release, then channel
//  serializers, then HICANN endpoints, then the trace module. seq is the
//  insertion counter, so equal (time, priority) events run FIFO.
#ifndef PULSECOMM_SIMCORE_HPP
#define PULSECOMM_SIMCORE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <queue>
#include <vector>

#include "pulsecomm/timebase.hpp"

namespace pulsecomm
{

enum class Priority : std::uint8_t
{
    playback = 0,
    serializer = 1,
    hicann = 2,
    trace = 3,
};

struct SimEvent
{
    TimePoint time;
    Priority priority{Priority::playback};
    std::uint64_t seq{0};
    std::function<void()> action;
};

class Engine
{
public:
    using Observer = std::function<void(const SimEvent &)>;

    Engine() = default;
    Engine(const Engine &) = delete;
    Engine &operator=(const Engine &) = delete;

    // Throws InvariantViolation if `time` lies before now()
    std::uint64_t schedule(
            TimePoint time, Priority priority, std::function<void()> action);
    // Executes all events with time < end in total order; now() stays at the
    // last executed event
    void run_until(TimePoint end);
    // Executes every pending event
    void run_all();

    [[nodiscard]] TimePoint now() const { return now_; }
    [[nodiscard]] std::size_t pending() const { return queue_.size(); }
    [[nodiscard]] std::uint64_t executed() const { return executed_; }
    // Called before each event runs; used by tests to check ordering
    void set_observer(Observer observer) { observer_ = std::move(observer); }

private:
    struct Later
    {
        bool operator()(const SimEvent &a, const SimEvent &b) const
        {
            if (a.time != b.time)
            {
                return a.time > b.time;
            }
            if (a.priority != b.priority)
            {
                return a.priority > b.priority;
            }
            return a.seq > b.seq;
        }
    };

    void execute_next();

    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
    TimePoint now_{0};
    std::uint64_t next_seq_{0};
    std::uint64_t executed_{0};
    Observer observer_;
};

// Stages a pulse can reach, in path order. Playback pulses start at
// `requested`; BEG pulses start at `upstream_emit`. A pulse visits a prefix
// of its path and stops at a drop stage or at trace_record.
enum class Stage : std::uint8_t
{
    requested = 0,
    released,
    channel_enqueue,
    channel_drop,
    hicann_arrival,
    upstream_emit, // HICANN record timestamp (4 ns grid)
    merger_drop,
    upstream_delivered,
    trace_drop,
    trace_record,
    cutoff, // experiment ended before the pulse was recorded
};
inline constexpr std::size_t stage_count = 11;

const char *stage_name(Stage stage);
bool is_drop_stage(Stage stage);

enum class PulseOrigin : std::uint8_t
{
    playback,
    beg,
};

struct PulseHistory
{
    std::uint8_t hicann{0};
    std::uint16_t label9{0};
    PulseOrigin origin{PulseOrigin::playback};
    std::array<std::int64_t, stage_count> time_ns;
    Stage last_stage{Stage::requested};

    PulseHistory() { time_ns.fill(-1); }
    [[nodiscard]] bool reached(Stage s) const
    {
        return time_ns[static_cast<std::size_t>(s)] >= 0;
    }
    [[nodiscard]] std::int64_t at(Stage s) const
    {
        return time_ns[static_cast<std::size_t>(s)];
    }
    [[nodiscard]] bool dropped() const { return is_drop_stage(last_stage); }
    [[nodiscard]] bool traced() const { return last_stage == Stage::trace_record; }
};

class GroundTruthLog
{
public:
    // Registers a pulse; its first stage is `requested` (playback) or
    // `upstream_emit` (BEG). Returns the pulse id.
    std::uint64_t add_pulse(std::uint8_t hicann, std::uint16_t label9,
            PulseOrigin origin, Stage first_stage, TimePoint t);
    void record(std::uint64_t pulse_id, Stage stage, TimePoint t);
    // Marks every pulse that is neither traced nor dropped as cut off
    void finalize(TimePoint end);

    [[nodiscard]] const std::vector<PulseHistory> &pulses() const
    {
        return pulses_;
    }
    [[nodiscard]] std::size_t size() const { return pulses_.size(); }
    [[nodiscard]] std::size_t traced_count() const;
    [[nodiscard]] std::size_t dropped_count() const;
    [[nodiscard]] std::size_t dropped_at(Stage stage) const;
    // FNV-1a over every field; identical logs hash identically
    [[nodiscard]] std::uint64_t hash() const;

    // One row per pulse per reached stage: pulse_id,stage,time_ns,dropped
    void write_csv(std::ostream &out) const;

private:
    std::vector<PulseHistory> pulses_;
};

} // namespace pulsecomm

#endif
