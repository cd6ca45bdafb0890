// trace.cpp
#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/trace.hpp"

void pulsecomm::validate(const TraceConfig &config)
{
    if (config.fifo_depth < 1)
    {
        throw ConfigError("trace.fifo_depth must be >= 1");
    }
    if (config.capacity < 0 || config.capacity > playback_capacity_pulses)
    {
        throw ConfigError("trace.capacity must be in [0, 125000000]");
    }
    if (config.pulses_per_cycle < 1)
    {
        throw ConfigError("trace.pulses_per_cycle must be >= 1");
    }
}

std::uint64_t pulsecomm::TraceMemory::drops() const
{
    std::uint64_t n = capacity_drops;
    for (const std::uint64_t d : fifo_drops)
    {
        n += d;
    }
    return n;
}

bool pulsecomm::TraceMemory::append(TraceRecord record)
{
    if (static_cast<std::int64_t>(records.size()) >= capacity)
    {
        full = true;
        ++capacity_drops;
        return false;
    }
    record.record_order = records.size();
    records.push_back(record);
    return true;
}

std::int64_t pulsecomm::record_epoch(const HicannTimestamp ts, const TimePoint now)
{
    const std::int64_t epoch = now.tech_ns / wrap_period_ns;
    const std::int64_t phase = now.tech_ns % wrap_period_ns;
    if (std::int64_t{ts.ticks15} * hicann_tick_ns > phase)
    {
        return epoch - 1;
    }
    return epoch;
}

pulsecomm::TraceModule::TraceModule(
        Engine &engine, const TraceConfig &config, GroundTruthLog *log)
        : engine_(engine)
        , config_(config)
        , log_(log)
{
    validate(config_);
    memory_.capacity = config_.capacity;
}

void pulsecomm::TraceModule::push(const InFlightPulse &pulse)
{
    auto &fifo = fifos_.at(pulse.pulse.hicann);
    if (fifo.size() >= static_cast<std::size_t>(config_.fifo_depth))
    {
        ++memory_.fifo_drops[pulse.pulse.hicann];
        if (log_ != nullptr)
        {
            log_->record(pulse.pulse_id, Stage::trace_drop, engine_.now());
        }
        return;
    }
    fifo.push_back(pulse);
    if (!cycle_pending_)
    {
        schedule_cycle();
    }
}

void pulsecomm::TraceModule::schedule_cycle()
{
    const std::int64_t now = engine_.now().tech_ns;
    std::int64_t t = (now + fpga_tick_ns - 1) / fpga_tick_ns * fpga_tick_ns;
    t = std::max(t, last_cycle_ns_ + fpga_tick_ns);
    cycle_pending_ = true;
    engine_.schedule(TimePoint{t}, Priority::trace, [this]() { on_cycle(); });
}

void pulsecomm::TraceModule::on_cycle()
{
    cycle_pending_ = false;
    last_cycle_ns_ = engine_.now().tech_ns;
    int served = 0;
    std::size_t idle = 0;
    while (served < config_.pulses_per_cycle && idle < fifos_.size())
    {
        auto &fifo = fifos_[next_channel_];
        next_channel_ = (next_channel_ + 1) % fifos_.size();
        if (fifo.empty())
        {
            ++idle;
            continue;
        }
        idle = 0;
        const InFlightPulse p = fifo.front();
        fifo.pop_front();
        ++served;

        TraceRecord r;
        r.hicann = p.pulse.hicann;
        r.label9 = p.pulse.label9;
        r.ts = p.pulse.ts;
        r.overflow_epoch = record_epoch(p.pulse.ts, engine_.now());
        r.pulse_id = p.pulse_id;
        const bool stored = memory_.append(r);
        if (log_ != nullptr)
        {
            log_->record(p.pulse_id, stored ? Stage::trace_record : Stage::trace_drop,
                    engine_.now());
        }
    }
    for (const auto &fifo : fifos_)
    {
        if (!fifo.empty())
        {
            schedule_cycle();
            break;
        }
    }
}

void pulsecomm::TraceModule::insert_overflow_marker(const TimePoint t)
{
    if (t.tech_ns <= 0 || t.tech_ns % wrap_period_ns != 0)
    {
        throw InvariantViolation("overflow marker off the wrap grid");
    }
    memory_.overflow_markers = t.tech_ns / wrap_period_ns;
}

std::vector<pulsecomm::LabeledTrain> pulsecomm::to_spike_trains(
        const TraceMemory &memory)
{
    std::array<std::vector<WrappedTime>, hicanns_per_fpga> per_channel;
    std::array<std::vector<const TraceRecord *>, hicanns_per_fpga> refs;
    for (const TraceRecord &r : memory.records)
    {
        per_channel.at(r.hicann).push_back({r.ts, r.overflow_epoch});
        refs[r.hicann].push_back(&r);
    }
    std::map<std::pair<int, int>, std::vector<double>> by_key;
    for (std::size_t h = 0; h < per_channel.size(); ++h)
    {
        const std::vector<TimePoint> abs = unwrap_timestamps(per_channel[h]);
        for (std::size_t i = 0; i < abs.size(); ++i)
        {
            by_key[{int(h), refs[h][i]->label9}].push_back(tech_to_bio(abs[i]));
        }
    }
    std::vector<LabeledTrain> out;
    out.reserve(by_key.size());
    for (auto &[key, times] : by_key)
    {
        std::sort(times.begin(), times.end());
        LabeledTrain lt;
        lt.hicann = static_cast<std::uint8_t>(key.first);
        lt.label9 = static_cast<std::uint16_t>(key.second);
        lt.train.source_id = key.first * label9_limit + key.second;
        lt.train.times_bio_ms = std::move(times);
        out.push_back(std::move(lt));
    }
    return out;
}

void pulsecomm::write_trace_csv(std::ostream &out, const TraceMemory &memory)
{
    out << "record_order,hicann,label9,ts15,epoch,abs_ns,bio_ms\n";
    // 1 ns is 0.01 ms biological time, so two decimals are exact
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::fixed << std::setprecision(2);
    for (const TraceRecord &r : memory.records)
    {
        const TimePoint abs = r.absolute();
        out << r.record_order << ',' << int(r.hicann) << ',' << r.label9 << ','
            << r.ts.ticks15 << ',' << r.overflow_epoch << ',' << abs.tech_ns
            << ',' << tech_to_bio(abs) << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

pulsecomm::TraceMemory pulsecomm::read_trace_csv(std::istream &in)
{
    TraceMemory mem;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line.rfind("record_order", 0) == 0)
        {
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ','))
        {
            cells.push_back(cell);
        }
        if (cells.size() != 7)
        {
            throw ParseError("trace csv: expected 7 columns", line_no);
        }
        try
        {
            TraceRecord r;
            const long hicann = std::stol(cells[1]);
            const long label = std::stol(cells[2]);
            const long ts = std::stol(cells[3]);
            if (hicann < 0 || hicann >= hicanns_per_fpga || label < 0
                    || label >= label9_limit || ts < 0 || ts >= timestamp_modulus)
            {
                throw ParseError("trace csv: field out of range", line_no);
            }
            r.hicann = static_cast<std::uint8_t>(hicann);
            r.label9 = static_cast<std::uint16_t>(label);
            r.ts.ticks15 = static_cast<std::uint16_t>(ts);
            r.overflow_epoch = std::stoll(cells[4]);
            mem.append(r);
        }
        catch (const std::logic_error &)
        {
            throw ParseError("trace csv: malformed number", line_no);
        }
    }
    return mem;
}

std::vector<std::uint32_t> pulsecomm::encode_trace(const TraceMemory &memory)
{
    std::vector<std::uint32_t> words;
    words.reserve(memory.records.size() + 1);
    std::int64_t epoch = 0;
    for (const TraceRecord &r : memory.records)
    {
        if (r.overflow_epoch != epoch)
        {
            if (r.overflow_epoch < 0 || r.overflow_epoch > payload_mask)
            {
                throw FormatError("trace epoch does not fit 29 bits",
                        words.size());
            }
            epoch = r.overflow_epoch;
            words.push_back(make_word(WordTag::overflow_marker,
                    static_cast<std::uint32_t>(epoch)));
        }
        const std::uint32_t payload =
                (std::uint32_t{make_label14(r.hicann, r.label9)} << 15)
                | r.ts.ticks15;
        words.push_back(make_word(WordTag::trace_record, payload));
    }
    return words;
}

pulsecomm::TraceMemory pulsecomm::decode_trace(std::span<const std::uint32_t> words)
{
    TraceMemory mem;
    std::int64_t epoch = 0;
    for (std::size_t i = 0; i < words.size(); ++i)
    {
        const std::uint32_t w = words[i];
        switch (word_tag(w))
        {
        case WordTag::overflow_marker:
            epoch = w & payload_mask;
            break;
        case WordTag::trace_record:
        {
            const auto label14 = static_cast<std::uint16_t>((w >> 15) & 0x3FFFU);
            TraceRecord r;
            r.hicann = label14_hicann(label14);
            r.label9 = label14_label9(label14);
            r.ts.ticks15 = static_cast<std::uint16_t>(w & 0x7FFFU);
            r.overflow_epoch = epoch;
            mem.append(r);
            break;
        }
        default:
            throw FormatError("unexpected word in trace stream", i);
        }
    }
    return mem;
}
